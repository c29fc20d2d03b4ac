"""State and control vector layout.

The 31-entry state holds the 14 chassis rates, the 14 chassis coordinates,
and the 3 curvilinear path coordinates::

    [0:6]   body velocities: X_dot, Y_dot, Z_dot, roll/pitch/yaw rates
    [6:10]  wheel vertical rates (fr, fl, rr, rl)
    [10:14] wheel spin rates (fr, fl, rr, rl)
    [14:20] body positions: X, Y, Z, roll, pitch, yaw
    [20:24] wheel center heights above the road (fr, fl, rr, rl)
    [24:28] wheel spin angles (fr, fl, rr, rl)
    [28:31] path states: s, n, chi

Vertical coordinates are absolute: Z is the sprung-mass CG height, the wheel
entries are wheel-center heights (so the wheel-center height doubles as the
contact force moment arm of the spin equation, and tire deflection is simply
unloaded radius minus height).  Controls are the driver steering input and
the four wheel torques.

The canonical generalized-coordinate ordering of the unsprung block is spins
first, verticals second; the slices below map the state layout onto it.
"""

import numpy as np

N_STATES = 31
N_CONTROLS = 5

# velocity block
VX, VY, VZ, WROLL, WPITCH, WYAW = range(6)
VZW = slice(6, 10)
WSPIN = slice(10, 14)
# position block
X, Y, Z, ROLL, PITCH, YAW = range(14, 20)
ZW = slice(20, 24)
SPIN = slice(24, 28)
# path block
S, N, CHI = 28, 29, 30

QB_RATES = slice(0, 6)
QB_COORDS = slice(14, 20)

# controls
U_STEER = 0
U_TORQUE = slice(1, 5)

WHEEL_NAMES = ("fr", "fl", "rr", "rl")
RIGHT_SIGN = np.array([1.0, -1.0, 1.0, -1.0])  # +right / -left convention
FRONT = (0, 1)
REAR = (2, 3)

STATE_NAMES = (
    "vx", "vy", "vz", "roll_rate", "pitch_rate", "yaw_rate",
    "vzw_fr", "vzw_fl", "vzw_rr", "vzw_rl",
    "spin_rate_fr", "spin_rate_fl", "spin_rate_rr", "spin_rate_rl",
    "x", "y", "z", "roll", "pitch", "yaw",
    "zw_fr", "zw_fl", "zw_rr", "zw_rl",
    "spin_fr", "spin_fl", "spin_rr", "spin_rl",
    "s", "n", "chi",
)
CONTROL_NAMES = ("steer", "torque_fr", "torque_fl", "torque_rr", "torque_rl")
