"""Incoherent Kraus decompositions: verification, reduction, regions.

Core objects: :class:`~krausfold.channel.KrausSet` with Choi-matrix
certification, reduction drivers that compress canonical qubit and
qutrit decompositions by mixing with explicit unitaries, and Gell-Mann
Bloch tooling for single-qutrit achievable-region analysis.
"""

__version__ = "0.1.0"

from .bloch import (
    GELL_MANN,
    ConditionReport,
    bloch_to_density,
    check_conditions,
    closed_form_deviation,
    density_to_bloch,
    push_forward,
    sio_canonical_params,
    sio_image_closed_form,
)
from .channel import (
    KrausSet,
    channels_equal,
    choi,
    choi_rank,
    choi_spectrum,
    classify,
    completeness_defect,
    is_incoherent,
    is_strictly_incoherent,
    load_kraus,
    save_kraus,
    signature_of,
)
from .densemath import UnitaryMatrix, complete_to_unitary, frobenius_distance
from .reduction import (
    REGIME_BOUNDS,
    ReductionOutcome,
    cancellation_row,
    connecting_unitary,
    merge_proportional,
    mix,
    reduce_qubit_io,
    reduce_qutrit_io,
    reduce_qutrit_sio,
    run_merge_group,
)
from .sampler import (
    RegionRequest,
    SamplerConfig,
    dephasing_channel,
    identity_channel,
    sample_channel,
    sample_region,
)
from .tables import (
    QUBIT4,
    QUBIT5,
    QUTRIT_IO39,
    QUTRIT_SIO15,
    TABLES,
    class_of_signature,
    enumerate_io_signatures,
    enumerate_sio_signatures,
)

__all__ = [
    "__version__",
    "GELL_MANN",
    "ConditionReport",
    "bloch_to_density",
    "check_conditions",
    "closed_form_deviation",
    "density_to_bloch",
    "push_forward",
    "sio_canonical_params",
    "sio_image_closed_form",
    "KrausSet",
    "channels_equal",
    "choi",
    "choi_rank",
    "choi_spectrum",
    "classify",
    "completeness_defect",
    "is_incoherent",
    "is_strictly_incoherent",
    "load_kraus",
    "save_kraus",
    "signature_of",
    "UnitaryMatrix",
    "complete_to_unitary",
    "frobenius_distance",
    "REGIME_BOUNDS",
    "ReductionOutcome",
    "cancellation_row",
    "connecting_unitary",
    "merge_proportional",
    "mix",
    "reduce_qubit_io",
    "reduce_qutrit_io",
    "reduce_qutrit_sio",
    "run_merge_group",
    "RegionRequest",
    "SamplerConfig",
    "dephasing_channel",
    "identity_channel",
    "sample_channel",
    "sample_region",
    "QUBIT4",
    "QUBIT5",
    "QUTRIT_IO39",
    "QUTRIT_SIO15",
    "TABLES",
    "class_of_signature",
    "enumerate_io_signatures",
    "enumerate_sio_signatures",
]
