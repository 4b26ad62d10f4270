from dsii.command_line.EntryPoint import main

main()
