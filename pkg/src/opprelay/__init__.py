"""Opportunistic relay selection: simulator and numerical analysis toolkit.

Subpackages by concern:

* fading      - Rayleigh/Ricean power-gain sampling and topology profiles
* selection   - timer policies, collision window, abstract selection rounds
* orderstats  - timer laws, collision probability (quadrature + MC oracle)
* bessel      - modified Bessel functions K0, K1
* protosim    - packet-level event simulation of one selection round
* dmt         - outage curves and diversity-order estimation
* experiments - config-driven experiment runner and CSV emission
* cli         - `opprelay` command-line entry point
"""

__version__ = "0.1.0"

from .fading import (FadingKind, FadingModel, RelayProfile, Topology,  # noqa: F401
                     TopologyCase, beta_from_distance, sample_power_gain,
                     topology_case)
from .selection import (Policy, SelectionOutcome, TimingParams,  # noqa: F401
                        collision_window, policy_value, run_selection_round,
                        timer_value)
from .orderstats import (CollisionQuery, QuadratureError,  # noqa: F401
                         TimerDistribution, bessel_k, collision_prob_analytic,
                         joint_pdf_min_two, mc_collision_oracle,
                         mc_collision_rate, timer_cdf, timer_pdf)
from .protosim import NodeGeometry, RoundTrace, simulate_round, simulate_rounds  # noqa: F401
from .dmt import (DmtScenario, FixedRate, InsufficientTrialsError,  # noqa: F401
                  MultiplexRate, OutageSample, Scheme, check_lemma4_inequality,
                  diversity_slope, outage_af, outage_curve, outage_df,
                  select_best_relay_gains)
from .experiments import (ConfigError, ExperimentConfig, ResultTable,  # noqa: F401
                          emit_csv, parse_config, read_csv, run_experiment)
