"""Step through a single adaptive+greedy run.

Shows how the model error and the kriging variance fall as samples come in,
and how well the per-cell KV predicts where the model is wrong.
"""

from soilkrige.exploration import StrategyConfig
from soilkrige.simulation import demo_surrogate, kv_mse_correlation, run_exploration

field = demo_surrogate(seed=7)
rec = run_exploration(StrategyConfig("adaptive_greedy", budget=50, seed=7), field)

print(" step   cell      path m   RMSE kPa   KV kPa^2")
for s in rec.steps:
    if s.step <= 5 or s.step % 5 == 0:
        print(f"{s.step:5d}   {str(s.cell):8s} {s.path_m:8.0f} {s.rmse:10.2f} {s.kv:10.1f}")

r = kv_mse_correlation(rec)
print(f"\nPearson r between per-cell KV and squared error over all steps: {r:.3f}")

# compare with a next-best-view run that ignores travel cost
greedy = run_exploration(StrategyConfig("greedy", budget=50, seed=7), field)
print(f"greedy NBV: RMSE {greedy.final_rmse:.2f} kPa after {greedy.path_m:.0f} m; "
      f"adaptive: RMSE {rec.final_rmse:.2f} kPa after {rec.path_m:.0f} m")
