"""Desk-scale FMCW radar attack laboratory.

Simulates a victim automotive-style FMCW radar's full processing chain
(chirp synthesis, free-space channel, dechirp, Range-Doppler, CA-CFAR,
DBSCAN), a black-box attacker that estimates the victim's waveform timing
from observed transmissions, synthesis of false-positive / false-negative /
translation / jamming attack waveforms, and a seeded Monte-Carlo harness
that reports spoofing accuracy and detection-probability statistics.
"""

from .attacks import (AttackerState, FnConfig, NegativeDelay, SpoofTarget,
                      attack_amplitude, compute_attack_delay_doppler, fn_chirp,
                      fn_frame, fn_slope_offset, fp_chirp, fp_frame, jam_attack,
                      jam_frame, translation_attack, translation_frame)
from .channel import (LinkBudget, Target, add_thermal_noise, noise_power_dbm,
                      one_way_propagate, reflect_and_propagate, sample_rcs,
                      superpose)
from .estimation import (ChirpTrack, NoFrameDetected, Spectrogram,
                         VictimEstimate, VictimSensor, aggregate_estimates,
                         detect_frame_start, detect_randomization, fit_chirp,
                         extract_chirp_tracks, iqr_filter, predict_next_frame,
                         refine_frame_start, spectrogram)
from .harness import (ScenarioResult, match_outcomes, pd_pfa_sweep,
                      run_scenario, spoof_accuracy_report, spoof_accuracy_sweep)
from .iqfile import IQFileError, read_iq, write_iq
from .pipeline import (CfarConfig, Cluster, ClusterConfig, DetectionPoint,
                       IFMatrix, RangeDopplerMap, analytic_if_oracle, ca_cfar,
                       dbscan_cluster, dechirp, process_frame, range_doppler)
from .scenario import (AttackSpec, ScenarioConfig, ScenarioError, TargetSpec,
                       load_scenario, scenario_from_dict)
from .waveforms import (CONFIG_PRESETS, SPEED_OF_LIGHT, ConfigError, IQBuffer,
                        RadarConfig, RadarMetrics, derived_metrics, synth_chirp,
                        synth_frame)

__version__ = "0.1.0"
