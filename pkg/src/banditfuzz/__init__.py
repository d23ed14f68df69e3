"""Coverage-guided fuzzing with bandit-based seed scheduling."""

from .bandit import EXP3, UCB, Bandit, EpsilonGreedy, init_bandit
from .coverage import (
    CoverageLedger,
    CoverageSet,
    RewardParams,
    SaturationMonitor,
    clear_arm,
    compute_reward,
)
from .fuzzer import (
    BaselineCampaign,
    Campaign,
    CampaignConfig,
    CampaignReport,
    run_baseline,
    run_campaign,
    speedup,
)
from .testgen import MutationConfig, Test, TestPool, gen_seed, mutate

__version__ = "0.1.0"
