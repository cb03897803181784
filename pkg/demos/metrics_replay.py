"""Metric identities on published results, and McNemar between two runs."""

from neuroprolog import efficiency
from neuroprolog.metrics import executability_identity, mcnemar_test

# (config, acc, exec, first-try, correction, avg iterations)
rows = [
    ("Qwen-32B Base", 80.29, 97.04, 96.4, 17.0, 1.07),
    ("Qwen-32B Prolog FT", 85.14, 99.24, 98.7, 41.2, 1.02),
    ("Qwen-32B Cocktail", 85.52, 99.32, 90.7, 92.7, 1.11),
    ("GPT-OSS-20B Base", 84.91, 89.99, 45.0, 81.8, 1.75),
    ("GPT-OSS-20B Prolog FT", 86.12, 91.00, 55.0, 69.2, 1.61),
    ("GPT-OSS-20B Cocktail", 88.34, 93.00, 60.0, 70.8, 1.52),
    ("Qwen3-8B Base", 66.79, 72.93, 7.7, 70.7, 2.43),
    ("Qwen3-8B Prolog FT", 63.15, 75.96, 69.2, 27.7, 1.60),
    ("Qwen3-8B Cocktail", 64.51, 77.10, 69.8, 24.1, 1.54),
    ("Llama-3B Base", 21.53, 66.49, 47.5, 36.2, 1.90),
    ("Llama-3B Prolog FT", 21.83, 42.08, 23.4, 24.4, 2.36),
    ("Llama-3B Cocktail", 27.07, 57.92, 53.8, 8.9, 1.89),
]

print(f"{'config':24s} {'exec':>6s} {'implied':>8s} {'diff':>6s} {'eff':>6s}")
for name, acc, ex, ft, corr, it in rows:
    implied = executability_identity(ft, corr)
    print(f"{name:24s} {ex:6.2f} {implied:8.2f} {implied - ex:+6.2f} {efficiency(acc, ex, it):6.2f}")

# three rows do not satisfy the identity; the GPT-OSS ones land on accuracy instead

# b problems solved only by run A, c only by run B
for b, c in [(3, 12), (10, 30), (40, 75)]:
    r = mcnemar_test(b, c)
    print(b, c, f"p={r.p_value:.4g}", "exact" if r.exact else "chi2", r.marker)
