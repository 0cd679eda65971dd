"""
qkdsim
======
qkdsim is a Python package for simulating quantum key distribution
(BB84 and SARG04) over a noisy, lossy and eavesdropped channel, and the
IEEE 802.11i 4-way handshake with a quantum derived PTK.

Simple example
--------------
    >>> import numpy as np
    >>> import qkdsim as qs
    >>> rng = np.random.default_rng(0)
    >>> session = qs.run_qkd_session(qs.QkdParams(protocol='bb84'),
    ...                              qs.ChannelConfig(),
    ...                              qs.EveStrategy.none(), rng)
    >>> session.statistics['keys_match']
    True

Bugs
----
Please report any bugs that you find in an issue on the project's
repository. Or, even better, fork the repository and create a pull
request.

License
-------
qkdsim is licensed under the MIT License.
"""

# Release data
__license__ = "MIT"

__date__ = ""
__version__ = 0.1

from qkdsim.errors import *
from qkdsim.stats_functions import *
from qkdsim.quantum_core import *
from qkdsim.channel import *
from qkdsim.protocols import *
from qkdsim.postprocessing import *
from qkdsim.session import *
from qkdsim.handshake import *
from qkdsim.classes import *
from qkdsim.lab import *

from qkdsim.wrappers import *

import qkdsim.datasets
