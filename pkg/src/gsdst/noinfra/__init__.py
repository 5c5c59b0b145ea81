"""Link-level simulation of random-frequency uplink access."""
from .experiments import (
    SimReport,
    Table,
    run_denoise_experiment,
    run_detection_experiment,
    run_ser_experiment,
    run_trials,
    trial_rng,
)
from .model import (
    Association,
    Receiver,
    SimConfig,
    TransmitterRealization,
    clean_sequence,
    component_arrays,
    draw_scenario,
    received_sequence,
)
from .qam import constellation, qam_demodulate, qam_modulate
from .receivers import LOST, noinfra_receive, ora_sic_receive

__all__ = [
    "Association",
    "LOST",
    "Receiver",
    "SimConfig",
    "SimReport",
    "Table",
    "TransmitterRealization",
    "clean_sequence",
    "component_arrays",
    "constellation",
    "draw_scenario",
    "noinfra_receive",
    "ora_sic_receive",
    "qam_demodulate",
    "qam_modulate",
    "received_sequence",
    "run_denoise_experiment",
    "run_detection_experiment",
    "run_ser_experiment",
    "run_trials",
    "trial_rng",
]
