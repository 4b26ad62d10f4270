import logging
import queue
import threading
from types import SimpleNamespace

from dsii.lib.parallel.SweepWorkerThread import SweepWorkerThread

logger = logging.getLogger(__name__)

JOIN_POLL = 0.5


def parallel_map(function, arguments, **kwargs):
    """
    Applies function to every argument on a pool of worker threads and returns the results in argument order.
    numpy FFT and LAPACK release the GIL, so solves overlap.

    :param function: Function of one argument
    :param arguments: Sequence of arguments
    :param kwargs: Keyword Args, see below
    :return: List of SimpleNamespace(result, error) in argument order

    kwargs:
        threads: Number of worker threads (int > 0, default 1)
        on_progress_update: Function that should be called on progress update (called like: func(current, total))
    """
    arguments = list(arguments)
    threads = max(1, int(kwargs.get("threads", 1)))
    on_progress_update = kwargs.get("on_progress_update", None)
    total = len(arguments)

    if threads == 1 or total <= 1:
        outcomes = []
        for index, argument in enumerate(arguments):
            try:
                outcomes.append(SimpleNamespace(result=function(argument), error=None))
            except Exception as error:
                outcomes.append(SimpleNamespace(result=None, error=error))
            if on_progress_update is not None:
                on_progress_update(index + 1, total)
        return outcomes

    thread_lock = threading.Lock()
    task_queue = queue.Queue()
    completed_tasks = []

    def handle_thread_completed_task(completed_task, result, error):
        """
        Nested function that is called when a thread completes its current task
        :param completed_task: The completed task
        :param result: Return value of the function (None on error)
        :param error: Exception raised by the function or None
        :return: None
        """
        with thread_lock:
            completed_task.result = result
            completed_task.error = error
            completed_tasks.append(completed_task)
            if on_progress_update is not None:
                on_progress_update(len(completed_tasks), total)

    for i, argument in enumerate(arguments):
        task_queue.put(SimpleNamespace(task_id=i, argument=argument))

    thread_list = []
    for i in range(min(threads, total)):
        thread = SweepWorkerThread(i, function, task_queue, thread_lock,
                                   on_task_completed=handle_thread_completed_task)
        thread.start()
        thread_list.append(thread)

    try:
        for thread in thread_list:
            while thread.is_alive():
                thread.join(JOIN_POLL)
    except KeyboardInterrupt:
        # workers finish their current task and leave the rest of the queue
        for thread in thread_list:
            thread.stop()
        raise

    logger.debug("parallel_map finished %d tasks on %d threads", total, len(thread_list))
    return [SimpleNamespace(result=task.result, error=task.error)
            for task in sorted(completed_tasks, key=lambda x: x.task_id)]
