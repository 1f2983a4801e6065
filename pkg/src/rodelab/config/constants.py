"""Algorithm constants for rodelab.

These values reproduce the published hyperparameters of the role-based
learner and should only change together with the method itself.
"""

# === Representation Learning ===
ACTION_REPR_DIM = 20  # d
EFFECT_LOSS_REWARD_WEIGHT = 10.0  # lambda_e
REPR_PHASE_STEPS = 50_000  # t_e, environment timesteps

# === Networks ===
RNN_HIDDEN_DIM = 64
MIXER_EMBED_DIM = 32
PREDICTOR_HIDDEN_DIM = 64

# === Optimisation ===
LEARNING_RATE = 5e-4
RMSPROP_ALPHA = 0.99
BATCH_SIZE_EPISODES = 32
GAMMA = 0.99

# === Exploration ===
EPSILON_START = 1.0
EPSILON_FINISH = 0.05
EPSILON_ANNEAL_STEPS = 50_000
EPSILON_ANNEAL_STEPS_HARD = 500_000

# === Roles ===
ROLE_INTERVAL = 5  # c
ROLE_INTERVAL_SWEEP = (1, 3, 5, 7)
CLUSTERS_SINGLE_ENEMY = 2
CLUSTERS_HOMOGENEOUS = 3
CLUSTERS_HETEROGENEOUS = 5
KMEANS_RESTARTS = 10
KMEANS_MAX_ITER = 100
