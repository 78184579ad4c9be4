import os
import sys
import logging
from dataclasses import replace

import numpy as np
from dotenv import load_dotenv

# Allow running as `python data/generate_scenarios.py` from the project root
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from sisnet.network.generators import representative_five_node_scenario
from sisnet.network.scenario import Scenario, write_scenario
from sisnet.mdp_control.params import CostParams
from sisnet.network.contact_network import ContactNetwork

# Load environment variables from .env file (SISNET_* settings)
load_dotenv()

logging.basicConfig(level=logging.INFO, format='%(asctime)s - %(levelname)s - %(message)s')
logger = logging.getLogger(__name__)

SCENARIO_DIR = "data/scenarios"


def single_node_scenario() -> Scenario:
    """One healthy node with a self-loop; nothing should ever happen."""
    initial = np.array([0.0])
    initial.setflags(write=False)
    return Scenario(
        scenario_id="single_node",
        network=ContactNetwork.static([[0.4]], 3),
        params=CostParams(c=100.0, beta=0.3, T=3),
        initial=initial,
        seed=1,
    )


def build_scenarios() -> list:
    five = representative_five_node_scenario()
    useless = representative_five_node_scenario(beta=1.0)
    useless = replace(useless, scenario_id="five_node_useless_vaccine")
    return [five, useless, single_node_scenario()]


def main():
    os.makedirs(SCENARIO_DIR, exist_ok=True)
    for scenario in build_scenarios():
        path = os.path.join(SCENARIO_DIR, f"{scenario.scenario_id}.json")
        write_scenario(scenario, path)
    logger.info(f"Scenario files written to {SCENARIO_DIR}")


if __name__ == "__main__":
    main()
