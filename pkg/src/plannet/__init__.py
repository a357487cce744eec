from .config import Config, ModePreset, preset
from .library import PlanLibrary, Story, load_library, load_story, slots_accepting, triggers_for_type
from .network import BayesNet, Node, synth_cpt, to_dot
from .session import Session, build_network, new_session
