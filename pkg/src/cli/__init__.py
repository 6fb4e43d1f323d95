from .records import Quantity, RunRecord
from .units import parse_amplitudes, parse_angle, parse_complex, parse_field, parse_time
