from density_coverage.io.readers import ConfigError, MetricsIOError, load_config, read_metrics
from density_coverage.io.writers import dump_config, emit_metrics
