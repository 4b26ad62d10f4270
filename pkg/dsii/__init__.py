from dsii.Dsii import Dsii
from dsii.lib.config.RunConfig import RunConfig
from dsii.lib.forward.ScatteringData import ScatteringData
from dsii.lib.grid.ComplexGrid import ComplexField, ComplexGrid, gaussian, gaussian_sum
from dsii.lib.grid.DiskSpec import DiskSpec
