"""Reference values computed independently with scipy and frozen here.

HPD endpoints: scipy.optimize.brentq on ``logpdf(ppf(p + 1 - alpha)) -
logpdf(ppf(p))`` over the lower tail mass ``p`` (xtol=1e-17), then
``ppf(p)`` and ``ppf(p + 1 - alpha)`` from scipy.stats.  Families:
norm(), lognorm(1), gamma(3), beta(2, 5).

Binomial interval: brentq on the closed form
``20 * ln(0.25 / (t (1 - t))) = chi2.ppf(0.95, 1)``.

Exact binomial coverage: enumeration of x = 1..49 for n=50, theta=0.3,
with each interval solved by brentq on scipy's binom.logpmf deviance,
conditioned on an interior MLE.
"""

HPD_ORACLE = {
    ("normal", 0.01): (-2.5758293035489004, 2.5758293035489075),
    ("normal", 0.05): (-1.959963984540054, 1.959963984540056),
    ("normal", 0.1): (-1.6448536269514733, 1.6448536269514733),
    ("normal", 0.32): (-0.994457883209753, 0.9944578832097535),
    ("lognormal", 0.01): (0.013211970424312514, 10.24338375656442),
    ("lognormal", 0.05): (0.026091503652247074, 5.186948404369064),
    ("lognormal", 0.1): (0.037460508328064, 3.6127455092547267),
    ("lognormal", 0.32): (0.08325500766085558, 1.6255512675935282),
    ("gamma", 0.01): (0.1319813280650841, 8.450660076805558),
    ("gamma", 0.05): (0.3035005587228456, 6.401222048150403),
    ("gamma", 0.1): (0.4413268953660729, 5.479174712316368),
    ("gamma", 0.32): (0.8688422110305672, 3.8420330193705903),
    ("beta", 0.01): (0.005238198049166895, 0.7082821495076763),
    ("beta", 0.05): (0.017826730136472926, 0.5906172930618363),
    ("beta", 0.1): (0.030150864398200836, 0.5252886427022693),
    ("beta", 0.32): (0.07409531061489519, 0.3878729043388887),
}

CHI2_1_095 = 3.841458820694124
NORMAL_Q975 = 1.959963984540054
BINOMIAL_20_10 = (0.29098246003634654, 0.7090175399636535)
EXPONENTIAL_UPPER = 2.995732273553991  # -ln(0.05)
NORMAL_MEAN_25 = 0.3919927969080108  # z_0.975 / sqrt(25)
BINOMIAL_EXACT_COVERAGE = 0.9566596287816027
