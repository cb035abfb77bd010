"""Discrete and vector 3-colourings and the decoder back to assignments."""
from dppmle.coloring.decode import DecodeResult, DecoderParams, decode_assignment
from dppmle.coloring.discrete import (assignment_to_coloring, check_proper, complete_gadget,
                                      literal_priority, three_color)
from dppmle.coloring.vector import (AngleLikelihood, coloring_to_kernel, coloring_vectors,
                                    likelihood_from_angles, optimal_value, vector_error)
