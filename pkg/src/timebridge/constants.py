"""
Protocol defaults, column names and published reference values.
"""


class ProtocolDefaults:
    """Default grids and parameters of the empirical protocol."""

    # Threshold grid, in percent on the command line
    DELTA_LO_PCT = 0.035
    DELTA_HI_PCT = 0.5
    DELTA_K = 21

    # Physical time grid, seconds
    DT_LO = 60.0
    DT_HI = 65798.0
    DT_K = 21

    SEED = 0
    P0 = 1.0
    SYNTH_DT = 1.0

    # overshoot_exp_check needs at least this many samples
    MIN_EXP_CHECK_SAMPLES = 100

    OUTPUT_DIR_ENV = "TIMEBRIDGE_OUTPUT_DIR"
    OUTPUT_DIR = "outputs"


class PriceModes:
    """How a price is taken from a tick CSV row."""

    TRADE = "trade"
    MID = "mid"

    ALL = (TRADE, MID)


class Directions:
    """Directional change directions."""

    UP = "up"
    DOWN = "down"


class Units:
    """Unit labels written next to stored values."""

    SECONDS = "s"
    FRACTION = "fraction"
    FRACTION_SQ = "fraction^2"
    PER_SECOND = "1/s"
    EVENTS_PER_SECOND = "events/s"


class ScalingLaws:
    """Names of the four scaling laws and their reference exponents."""

    SQUARED_RETURNS = "squared_returns"
    OS_VARIABILITY = "os_variability"
    NORMALIZED_DC_COUNT = "normalized_dc_count"
    MEAN_OVERSHOOT = "mean_overshoot"

    ALL = (SQUARED_RETURNS, OS_VARIABILITY, NORMALIZED_DC_COUNT, MEAN_OVERSHOOT)

    # Brownian motion closed forms
    BROWNIAN_EXPONENTS = {
        SQUARED_RETURNS: 1.0,
        OS_VARIABILITY: 2.0,
        NORMALIZED_DC_COUNT: -2.0,
        MEAN_OVERSHOOT: 1.0,
    }

    X_UNITS = {
        SQUARED_RETURNS: Units.SECONDS,
        OS_VARIABILITY: Units.FRACTION,
        NORMALIZED_DC_COUNT: Units.FRACTION,
        MEAN_OVERSHOOT: Units.FRACTION,
    }

    ALPHA_UNITS = {
        SQUARED_RETURNS: "fraction^2 / s^E",
        OS_VARIABILITY: "fraction^(2-E)",
        NORMALIZED_DC_COUNT: "events/s / fraction^E",
        MEAN_OVERSHOOT: "fraction^(1-E)",
    }


class ReferenceValues:
    """
    Published full-scale results used as golden references.

    Only reproducible when the corresponding dataset is supplied; the
    Brownian values hold in distribution only.
    """

    BROWNIAN = {
        "label": "brownian",
        "n_points": 15_631_200,
        "exponents": {
            ScalingLaws.SQUARED_RETURNS: 1.0031,
            ScalingLaws.OS_VARIABILITY: 1.9088,
            ScalingLaws.NORMALIZED_DC_COUNT: -1.9023,
            ScalingLaws.MEAN_OVERSHOOT: 0.9793,
        },
        "alphas": {
            ScalingLaws.SQUARED_RETURNS: 2.4886e-9,
            ScalingLaws.OS_VARIABILITY: 6.2213e-1,
            ScalingLaws.NORMALIZED_DC_COUNT: 4.3071e-9,
            ScalingLaws.MEAN_OVERSHOOT: 9.0140e-1,
        },
        "c_mean": 2.5585e-9,
        "c_std": 4.100e-11,
        "lambda": 1.0,
    }

    ETHUSDT = {
        "label": "ethusdt",
        "n_points": 19_324_330,
        "span": 3_974_399,
        "exponents": {
            ScalingLaws.SQUARED_RETURNS: 0.9822,
            ScalingLaws.OS_VARIABILITY: 1.7249,
            ScalingLaws.NORMALIZED_DC_COUNT: -1.7534,
        },
        "alphas": {
            ScalingLaws.SQUARED_RETURNS: 2.5100e-8,
            ScalingLaws.OS_VARIABILITY: 2.4780e-1,
            ScalingLaws.NORMALIZED_DC_COUNT: 7.3369e-8,
        },
        "c_mean": 2.2094e-8,
        "c_std": 1.0552e-9,
        "lambda": 1.0,
    }

    USDJPY = {
        "label": "usdjpy",
        "n_points": 11_358_048,
        "span": 13_046_399,
        "exponents": {
            ScalingLaws.SQUARED_RETURNS: 0.9813,
            ScalingLaws.OS_VARIABILITY: 1.9516,
            ScalingLaws.NORMALIZED_DC_COUNT: -1.8959,
        },
        "alphas": {
            ScalingLaws.SQUARED_RETURNS: 8.1806e-10,
            ScalingLaws.OS_VARIABILITY: 8.4978e-1,
            ScalingLaws.NORMALIZED_DC_COUNT: 8.7241e-10,
        },
        "c_physical": 7.107e-10,
        "c_intrinsic": 5.1423e-10,
        "lambda": 0.7235,
    }

    ALL = {
        "brownian": BROWNIAN,
        "ethusdt": ETHUSDT,
        "usdjpy": USDJPY,
    }
