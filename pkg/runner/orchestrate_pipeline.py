import subprocess
import sys

SCENARIO = "data/scenarios/five_node.json"

# Exit code 3 means "completed with warnings" and does not stop the pipeline
TOLERATED_CODES = (0, 3)


def run_step(description, command):
    print(f"\n[ORCHESTRATOR] {description}...")
    result = subprocess.run(command, shell=True)
    if result.returncode not in TOLERATED_CODES:
        print(f"[ORCHESTRATOR] Step failed: {description}")
        sys.exit(result.returncode)
    if result.returncode == 3:
        print(f"[ORCHESTRATOR] Step completed with warnings: {description}")
    else:
        print(f"[ORCHESTRATOR] Step completed: {description}")


if __name__ == "__main__":
    scenario = sys.argv[1] if len(sys.argv) > 1 else SCENARIO

    # 1. Regenerate the bundled scenario files
    run_step(
        "Writing scenario files (generate_scenarios.py)",
        "python data/generate_scenarios.py"
    )

    # 2. Mean-field upper bound against Monte Carlo and exact marginals
    run_step(
        "Checking mean-field bounds (cli.py bound-check)",
        f"python -m runner.cli bound-check --scenario {scenario}"
    )

    # 3. Exact MDP solution and closed-loop simulation
    run_step(
        "Solving the vaccination MDP (cli.py solve-mdp)",
        f"python -m runner.cli solve-mdp --scenario {scenario}"
    )

    # 4. TransNN forward-backward sweep
    run_step(
        "Solving the TransNN schedule (cli.py solve-transnn)",
        f"python -m runner.cli solve-transnn --scenario {scenario}"
    )

    # 5. Side-by-side comparison of all methods
    run_step(
        "Comparing methods (cli.py compare)",
        f"python -m runner.cli compare --scenario {scenario}"
    )

    # 6. Small timing grid
    run_step(
        "Benchmark smoke run (cli.py bench)",
        "python -m runner.cli bench --sizes 3,4,5 --horizons 10 --repeats 1"
    )

    print("\n[ORCHESTRATOR] Pipeline completed successfully!")
