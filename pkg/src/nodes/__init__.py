# Pipeline nodes for the wave-packet scattering simulator
from .input_node import input_node
from .run1d_node import run1d_node
from .run2d_node import run2d_node
from .oracle_node import oracle_node
from .compare_node import compare_node
from .load_run_node import load_run_node
from .analysis_node import analysis_node
from .manifest_node import manifest_node
