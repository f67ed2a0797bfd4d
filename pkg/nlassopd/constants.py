# numerical tolerances
FLOW_RESIDUAL_EPS = 1e-12  # residual capacity below which an arc is saturated
STD_GUARD_EPS = 1e-12  # channel standard deviation below which a channel is constant
NORM_ZERO_EPS = 1e-300  # guard for divisions by block norms
DENSE_EIGEN_MAX_NODES = 2000  # dense symmetric eigensolver up to this many nodes
EXACT_PINV_MAX_NODES = 200  # dense pseudo-inverse up to this many nodes
STEP_SIZE_MARGIN = 1e-3  # safety margin on the power-iteration estimate of the step-size norm
POWER_ITERATIONS = 500
POWER_ITERATION_TOL = 1e-12

# solver defaults
DEFAULT_TAU = 0.9
DEFAULT_MAX_ITERATIONS = 1000
DEFAULT_INEXACTNESS_FLOOR = 1e-3
DEFAULT_RNC_CG_TOL = 1e-10
DEFAULT_RNC_CG_MAX_ITERATIONS = 10000
RNC_RESIDUAL_SLACK = 100.0  # recomputed residual may exceed the CG tolerance by round-off
MIN_MODEL_VARIANCE = 1e-4  # known label variance used when labels are drawn without noise
LOG_EVERY = 100
MAX_GRAPH_RETRIES = 100  # redraws allowed to obtain a connected random graph

# primal update modes
CLOSED_FORM = 'closed_form'
FIXED_POINT = 'fixed_point'
NEWTON_STEP = 'newton_step'
PRIMAL_UPDATE_MODES = (CLOSED_FORM, FIXED_POINT, NEWTON_STEP)

# model kinds
GAUSSIAN = 'gaussian'
LOGISTIC = 'logistic'
SCALAR = 'scalar'
MODEL_KINDS = (GAUSSIAN, LOGISTIC, SCALAR)

# instance kinds
TWO_CLUSTER = 'two_cluster'
CHAIN = 'chain'
WEATHER = 'weather'
IMAGE = 'image'
INSTANCE_KINDS = (TWO_CLUSTER, CHAIN, WEATHER, IMAGE)

# fit methods
NLASSO = 'nlasso'
RNC = 'rnc'

# image segmentation
BACKGROUND_THRESHOLD = 0.5
FOREGROUND_THRESHOLD = 0.9

# bundle files
GRAPH_FILE = 'graph.txt'
ATTRIBUTES_FILE = 'attributes.csv'
TRAINING_FILE = 'training.txt'
PARTITION_FILE = 'partition.txt'
TRUTH_FILE = 'truth.csv'
FOCUS_FILE = 'focus.txt'
BUNDLE_FILE = 'bundle.json'
MANIFEST_FILE = 'manifest.json'
MANIFEST_COMMENT = '# manifest: '
WEATHER_FILE = 'weather.csv'
IMAGE_FILE = 'image.ppm'
TRUTH_MASK_FILE = 'truth_mask.ppm'
BUNDLE_FLOAT_FORMAT = '%.17g'  # round-trips every double

# output files
WEIGHTS_FILE = 'weights.csv'
HISTORY_FILE = 'history.csv'
CONFIG_ECHO_FILE = 'config.json'
REPORT_FILE = 'report.json'
SWEEP_FILE = 'sweep_connectivity.csv'
SWEEP_PLOT_FILE = 'sweep_connectivity.gp'
SWEEP_RUNS_FILE = 'sweep_connectivity_runs.csv'
BENCH_FILE = 'bench_weights.csv'
BENCH_SUMMARY_FILE = 'bench_summary.json'
BENCH_PLOT_FILE = 'bench_weights.gp'
MASK_FILE = 'mask.ppm'
SCORES_FILE = 'scores.csv'
FLOAT_FORMAT = '%.12g'

# exit codes
EXIT_OK = 0
EXIT_NUMERICAL = 1
EXIT_INPUT = 2

# error messages
DIMENSION_MISMATCH_ERR = 'dimension mismatch: expected {expected}, got {actual}'
NODE_COUNT_ERR = 'node count must be positive, got {node_count}'
SELF_LOOP_ERR = 'self-loop at node {node}'
DUPLICATE_EDGE_ERR = 'duplicate edge {{{i}, {j}}}'
EDGE_WEIGHT_ERR = 'edge {{{i}, {j}}} has non-positive weight {weight}'
NODE_RANGE_ERR = 'node {node} out of range 1..{node_count}'
ISOLATED_NODE_ERR = 'node {node} is isolated (zero degree)'
EDGE_ID_ERR = 'unknown edge id {edge}'
DISCONNECTED_ERR = 'graph is disconnected: component containing node {node} ({size} nodes) is separated'
CLUSTER_DISCONNECTED_ERR = 'cluster {cluster} induces a disconnected subgraph'
PARTITION_SIZE_ERR = 'partition assigns {actual} nodes, graph has {expected}'
PARTITION_EMPTY_CLUSTER_ERR = 'cluster ids must be 1..{count} without gaps, cluster {cluster} is empty'
PARTITION_NO_GAP_ERR = 'partition has no cluster with at least two nodes'
SOURCE_IN_SINKS_ERR = 'source node {node} belongs to the sink set'
EMPTY_SINKS_ERR = 'sink set is empty'
CAPACITY_ERR = 'capacities must be non-negative and one per edge'
REPRESENTATIVE_ERR = 'representative {node} of cluster {cluster} is not a non-boundary node of the cluster'
EMPTY_TRAINING_SET_ERR = 'training set is empty'
TRAINING_NODE_ERR = 'training node {node} out of range 1..{node_count}'
UNLABELED_TRAINING_NODE_ERR = 'training node {node} has no finite label'
NOISE_VARIANCE_ERR = 'noise variances must be positive'
LOGISTIC_LABEL_ERR = 'logistic labels must be in {{-1, +1}} (or {{0, 1}} in files), got {label}'
NON_POSITIVE_TAU_ERR = 'primal step size must be positive, got {tau}'
CONTRACTION_ERR = 'fixed-point map is not a contraction: R = {r:.6g} >= 1; choose a smaller tau'
NO_CLOSED_FORM_ERR = 'model {model} has no closed-form primal update; use fixed_point or newton_step'
TAU_RANGE_ERR = 'tau must lie in (0, 1), got {tau}'
LAMBDA_ERR = 'lambda must be positive, got {lam}'
MAX_ITERATIONS_ERR = 'max_iterations must be >= 1, got {max_iterations}'
TOLERANCE_ERR = 'tolerance must be positive when given, got {tolerance}'
PRIMAL_MODE_ERR = 'primal_update must be one of {modes}, got {mode}'
INEXACTNESS_ERR = 'inexactness floor must be positive, got {floor}'
STEP_SIZE_ERR = 'step-size condition violated: ||Sigma^1/2 D T^1/2||^2 ~ {norm:.6g} (+ margin) >= 1'
NON_FINITE_ERR = 'non-finite iterate at iteration {iteration}'
RNC_LAMBDA_ERR = 'RNC regularization must be non-negative, got {lam}'
RNC_SINGULAR_ERR = 'RNC system is singular: an unlabeled node is not tied to any label (zero regularization or unlabeled component)'
RNC_NO_LABELS_ERR = 'RNC needs at least one labeled node'
ZERO_TRUTH_ERR = 'true weights are identically zero'
THEOREM_L_ERR = 'Assumption-3 constant L must exceed 3, got {L}'
THEOREM_K_ERR = 'Assumption-3 constant K must lie in (1, L - 2) = (1, {upper}), got {K}'
THEOREM_POSITIVE_ERR = 'theorem parameter {name} must be positive, got {value}'
CLUSTERED_SPEC_ERR = 'clustered signal has {actual} cluster values, partition has {expected} clusters'
SAMPLES_ERR = 'number of samples must be positive, got {samples}'
RETRY_LIMIT_ERR = 'could not draw a connected {what} within {retries} attempts'
CHAIN_SIZE_ERR = 'chain signal needs N >= 8, got {n}'
INTER_EDGES_ERR = 'inter-cluster edge count must lie in 0..{max_edges}, got {edges}'
LABELS_PER_CLUSTER_ERR = 'labels per cluster must lie in 1..{size}, got {labels}'
SPEC_POSITIVE_ERR = 'field {name} must be positive, got {value}'
DEGENERATE_IMAGE_ERR = 'degenerate image: maximum red value is zero'
EMPTY_CLASS_ERR = 'no {name} seed pixels (normalized redness thresholds {low} / {high})'
IMAGE_SHAPE_ERR = 'image must have shape (P, Q, 3) with P * Q >= 2, got {shape}'
KNN_ERR = 'K must satisfy 1 <= K < N = {n}, got {k}'
WEATHER_DAYS_ERR = 'weather table needs at least {needed} day columns, got {days}'
FOCUS_SIZE_ERR = 'focus cluster size must be below the station count {n}, got {size}'
IN_FILE_NOT_EXISTS_ERR = 'input file does not exist: {path}'
IN_FILE_FORMAT_ERR = 'incorrect file format in {path}, line {line}: {reason}'
CONFIG_JSON_ERR = 'malformed JSON in {path}, line {line} column {column}: {reason}'
CONFIG_FIELD_ERR = 'config field {field}: {reason}'
CONFIG_UNKNOWN_FIELD_ERR = 'unknown config field {field}'
CONFIG_MISSING_ERR = 'missing config field {field}'
INSTANCE_KIND_ERR = 'instance kind must be one of {kinds}, got {kind}'
MODEL_KIND_ERR = 'model kind must be one of {kinds}, got {kind}'
FIT_METHOD_ERR = 'fit method must be nlasso or rnc, got {method}'
RNC_MODEL_ERR = 'RNC baseline needs a scalar signal bundle (d = 1, unit features)'
TRAINING_SET_SIZE_ERR = 'training set needs at least {needed} labeled nodes, got {actual}'
MISSING_PARTITION_ERR = 'no partition: pass --partition or use a bundle with {file}'
MASK_SHAPE_ERR = 'truth mask has shape {actual}, image has shape {expected}'
