"""fogplan: joint task-placement and resource-allocation energy optimization
for streaming DAG applications on mobile/fog/cloud platforms."""

from .dag import (ApplicationDag, ValidationReport, builtin_dag, ccr,
                  cpu_workload, load_dag, random_dag, save_dag,
                  scale_to_ccr, scale_to_totals, validate_dag)
from .energy import EnergyBreakdown, connection_volume, computing_energy, \
    oneway_network_energy, total_energy, wireless_dynamic_power
from .platform import (BackhaulLinkSpec, Ecosystem, NodeSpec, ServiceModel,
                       WirelessLinkSpec, backhaul_dynamic_power,
                       backhaul_throughput, default_ecosystem,
                       load_ecosystem, max_resource_vector,
                       omega_coefficients, save_ecosystem)
from .rap import (RapConfig, RapResult, finite_difference_gradient,
                  lagrangian, lagrangian_gradient, rap_feasible, solve_rap,
                  step_sizes)
from .tap import (GaParams, TapResult, crossover, fitness, mutate,
                  random_allocation, solve_agtas, solve_aess, solve_fixed,
                  solve_otas)
from .timing import (allocation_from_names, allocation_names,
                     cloud_allocation, dag_execution_time,
                     dag_time_upper_bound, fog_allocation, input_volume,
                     jop_feasible_sufficient, mobile_allocation,
                     node_total_service_time, smoothed_dag_time,
                     task_execution_time, task_network_time,
                     task_service_time, validate_allocation)

__version__ = "0.1.0"
