"""Published values of delta(q; NR, R) for half-primorial moduli, used as
reference points by the table command and the tests."""

# q: (omega, rho/log q', delta)
REFERENCE_TABLE = {
    3: (1, 1.82, 0.999063),
    15: (2, 1.47, 0.999907),
    105: (3, 1.71, 0.999928),
    1155: (4, 2.26, 0.999877),
    15015: (5, 3.33, 0.999950),
    255255: (6, 5.14, 0.9999946),
    4849845: (7, 8.31, 0.999999928),
    111546435: (8, 13.81, 0.999999999954),
}

# the classical mod 4 race
DELTA_MOD4 = 0.9959

# first x with pi(x;4,1) > pi(x;4,3)
SKEWES_MOD4 = 26861

LAMBDA_CONSTANT = 0.086071
ZETA_FIRST_ZERO = 14.134725
