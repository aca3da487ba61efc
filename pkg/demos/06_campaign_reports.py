"""Running the two measurement campaigns and reading their reports.

Campaign 1 sweeps corpus x radii x operators through the explicit
construction; campaign 2 runs the dual feasibility search.  Both emit
deterministic CSV (schema-versioned, plot-ready) and print the corpus
maxima that stand in for the inequality constants.
"""

from stablab.harness import default_config, run_theorem1, run_theorem2

cfg = default_config(
    n=128,
    s_count=8,
    corpus_counts=(("spikes", 2), ("steps", 2), ("smooth", 2), ("mixture", 2)),
    dual_s_values=(0.75, 2.0),
)
print("config:", cfg.to_json())
print()

csv1, summary1 = run_theorem1(cfg)
print("campaign 1 summary:", summary1)
print("first rows:")
for line in csv1.splitlines()[:5]:
    print("  ", line[:110])
print()

csv2, summary2 = run_theorem2(cfg)
print("campaign 2 summary:", summary2)
for line in csv2.splitlines()[:5]:
    print("  ", line[:110])
print()
print("identical configs reproduce these byte for byte; the CLI command")
print("  stablab report --outdir reports")
print("writes theorem1.csv, theorem2.csv and summary.json for the default config.")
