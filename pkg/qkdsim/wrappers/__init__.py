from qkdsim.wrappers.qkd_from_scenario import qkd_from_scenario
from qkdsim.wrappers.handshake_from_scenario import handshake_from_scenario
