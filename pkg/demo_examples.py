import json
import logging
from typing import Dict, Optional

from channel_model import table_one
from full_csi_solver import evaluate_constant_policy, high_power_limit, r_max, solve_capacity
from main_csi_solver import solve_capacity_main
from rate_kernel import rs

logger = logging.getLogger(__name__)

# Walkthrough of the four-state instance: h_m, h_e in {1, 10}
P_AVG = 0.5
EXAMPLE_EPS = 0.2


def print_state_table(dist):
    print("State table (h_m | h_e | probability | R_s at P_avg)")
    for pair, probability in dist.atoms:
        print(f"  {pair.h_m:>4g} | {pair.h_e:>4g} | {probability:.2f} | {rs(pair.h_m, pair.h_e, P_AVG):.3f}")


def no_power_control(dist) -> Dict:
    """Constant power P_avg in every state, for a few outage levels"""
    rows = {}
    for eps in (0.0, 0.2, 0.5):
        evaluation = evaluate_constant_policy(dist, P_AVG, eps)
        rows[str(eps)] = evaluation._asdict()
        status = "✅" if evaluation.feasible else "⚠️"
        print(f"{status} eps={eps}: E[R_s]={evaluation.expected_rs:.4f}, R={evaluation.rate:.4f}, "
              f"channel outage {evaluation.channel_outage_prob:.2f}")
    return rows


def optimal_power_control(dist) -> Dict:
    solution = solve_capacity(dist, P_AVG, EXAMPLE_EPS)
    print(f"\nOptimal full-CSI policy at eps={EXAMPLE_EPS}: C = {solution.capacity:.4f}")
    print("  h_m | h_e | region | power")
    for row in solution.policy.region_table():
        print(f"  {row['h_m']:>3g} | {row['h_e']:>3g} | {row['region']:>6} | {row['power']:.3f}")
    print(f"  lambda = {solution.lambda_star:.4f}, E[P] = {solution.expected_power:.4f}, "
          f"E[R_s] = {solution.expected_rs:.4f}")
    return solution.to_json_dict()


def run_walkthrough(filename: Optional[str] = None) -> Dict:
    """
    Run both four-state examples and optionally save them as JSON

    Args:
        filename: where to write the results (skipped when None)
    """
    print("=== Four-state secrecy outage walkthrough ===\n")
    dist = table_one()
    print_state_table(dist)

    print("\nNo power control:")
    constant = no_power_control(dist)
    full = optimal_power_control(dist)
    main = solve_capacity_main(dist, P_AVG, EXAMPLE_EPS, full_capacity=full["capacity"])
    limit = high_power_limit(dist, EXAMPLE_EPS)
    print(f"\nMain-CSI capacity: {main.capacity:.4f}")
    print(f"R_max: {r_max(dist, P_AVG, EXAMPLE_EPS):.4f}, high-power limit: {limit:.4f}")

    results = {
        "p_avg": P_AVG,
        "no_power_control": constant,
        "full_csi": full,
        "main_csi": main.to_json_dict(),
        "high_power_limit": limit,
    }
    if filename:
        with open(filename, "w", encoding="utf-8") as f:
            json.dump(results, f, indent=2, default=float)
        print(f"\n📁 Walkthrough saved to: {filename}")
    return results


if __name__ == "__main__":
    run_walkthrough("four_state_examples.json")
