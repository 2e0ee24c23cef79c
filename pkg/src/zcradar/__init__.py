"""Zadoff-Chu multistatic radar: DCFT-domain successive cancellation detection."""

from .zcseq import (ZcSequence, default_seeds, delayed_zc, generate_zc, pccf_peak_bound,
                    periodic_correlation)
from .dcft import ChirpSpectrum, dcft, idcft, matched_peak_bin
from .scene import (Echo, ReceivedSignal, Scenario, band_limit, bistatic_delay_samples,
                    load_scenario, normalized_doppler, reflection_amplitude, scene_echoes,
                    synthesize_received)
from .rdmap import Detection, RangeDopplerMap, detect, estimate_params, range_doppler_map
from .canceller import (CancellationRecord, DetectionReport, cancel_one, raw_detect, sc_dcft,
                        sc_time)
from .harness import DetectionRateTable, TrialResult, emit_results, run_trial, sweep

__version__ = "0.1.0"
