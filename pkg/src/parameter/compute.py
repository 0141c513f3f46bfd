"""Compute derived game parameters from base parameters (box budget per domino)."""

import math
from fractions import Fraction
from typing import Dict, Any

from src.pcp.core import PcpInstance, string_to_probability


def boxes_for_precision(digits: int, n_constant) -> Fraction:
    """Boxes needed to read a probability to `digits` decimal places: c * 10^(2 digits)."""
    return Fraction(n_constant) * 10 ** (2 * digits)


def instance_facts(instance: PcpInstance) -> Dict[str, Any]:
    probabilities = [string_to_probability(s).value
                     for d in instance.dominoes
                     for s in (d.numerator, d.denominator)]
    return {
        'instance_name': instance.name,
        'num_dominoes': len(instance),
        'l_max': instance.l_max,
        'p_min': min(probabilities),
    }


def compute_derived(base: Dict[str, Any]) -> Dict[str, Any]:
    """
    Compute all derived parameters from base parameters.
    Returns a complete parameter dictionary with both base and derived values.

    base needs 'mode', 'n_constant', 'l_max' and 'p_min'.
    """
    params = base.copy()

    # The referee reads one digit beyond the longest string; the trailing
    # '0' terminates the decoded string.
    params['decode_digits'] = base['l_max'] + 1

    if base['mode'] == 'exact':
        # one symbolic box survives to the referee
        params['n_prime'] = 1
    else:
        per_string = boxes_for_precision(params['decode_digits'], Fraction(str(base['n_constant'])))
        # referee discards the t outcomes of the first compartment
        params['n_prime'] = math.ceil(per_string / Fraction(base['p_min']))

    # 1/2 verified by V1, 1/4 of the rest encoded, 1/3 for each V2 check
    params['boxes_per_domino'] = 24 * params['n_prime']
    return params
