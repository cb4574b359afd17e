import sys
from importlib import resources
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))


def cart_source() -> str:
    return resources.files("burstmine.data").joinpath("cart.mir").read_text()
