"""Computational lab for the hyperspace of compact subgroups."""
__version__ = "0.1.0"

from .finite import FiniteGroup, GroupTableError
from .groups import (CompactGroup, FiniteExplicit, MatrixGroup, SampleSet, SemidirectGroup, Torus,
                     SubgroupHandle, Full, FiniteSubgroup, CyclicGridSubgroup, Conjugate,
                     GroupError, center_components, conjugate_subgroup, group_alpha, group_beta,
                     group_from_json)
from .hyperspace import (Ball, Region, VietorisNbhd, Verdict, hausdorff_distance,
                         vietoris_contains, converging_sequence_report)
from .lie import LieAlgebraData, derived_subalgebra, is_perfect, ricci_min, myers_bound, exp_coverage_check
from .intrep import (IntegerRep, RationalLattice, invariant_lattice_quotient, glz_conjugate,
                     rational_irreducible, minimality_check)
from .cohomology import FiniteModule, Extension, h2, split_after_quotient
from .isolation import isolation_verdict, approximation_sequence, conjugacy_search, turing_gap
from .functorial import GroupHom, pushforward, lift_preimage, openness_probe
