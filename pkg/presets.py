import copy
import json
from pathlib import Path
from typing import List

from errors import ScenarioError
from scenario import Scenario, scenario_from_dict

# Сценарии-заготовки: эллипс Кирхгофа, вихрь Ранкина, кольцо, конфокальная пара
_PRESETS = json.loads(Path(__file__).with_name("scenarios_seed.json").read_text(encoding="utf-8"))


def preset_names() -> List[str]:
    return sorted(_PRESETS)


def load_preset(name: str) -> Scenario:
    """Сценарий-заготовка по имени"""
    if name not in _PRESETS:
        raise ScenarioError(f"unknown preset '{name}', choose from {', '.join(preset_names())}")
    return scenario_from_dict(copy.deepcopy(_PRESETS[name]))
