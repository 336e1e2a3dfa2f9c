#!/usr/bin/env python

"""
Run with `python -m example`
"""
from pwlcomplexity.arrangement import enumerate_chambers, is_general_position
from pwlcomplexity.bounds import b_recurrence, invariant_upper_bound, schlafli
from pwlcomplexity.complexity import c_tilde, c_tilde_invariant_shallow
from pwlcomplexity.presets import appendix_a1b, appendix_a2, example
from pwlcomplexity.printcolor import print_cyan


def main() -> None:
    """Count regions and classes of regions for a few small models"""

    # Four lines in general position cut the plane into 1 + 4 + 6 = 11 chambers.
    arr = appendix_a1b()
    chambers = enumerate_chambers(arr, ambient=True)
    print_cyan("Four lines in general position")
    print(f"chambers = {len(chambers)}, schlafli bound = {schlafli(2, 4)}")
    print(f"general position: {bool(is_general_position(arr))}")

    # A permutation-invariant network on the plane. Its 11 regions fall into 7 orbits
    # under the swap of the two coordinates, and regions in one orbit are equivalent.
    report = c_tilde_invariant_shallow(appendix_a2())
    print_cyan("Invariant network with two blocks")
    print(report.summary())
    print(
        f"generic count b = {b_recurrence(2, 2, 2)}, "
        f"bound on c~ = {invariant_upper_bound(2, 2).render()}"
    )

    # A sawtooth on [0, 1] whose four pieces are all equivalent under reflections and
    # translations of the line.
    print_cyan("Sawtooth on the unit interval")
    print(c_tilde(example(2)).summary())


if __name__ == "__main__":
    main()
