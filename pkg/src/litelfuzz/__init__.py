"""litelfuzz: deterministic swarm simulation plus robustness-guided fuzzing.

The package couples a discrete-time multi-agent simulator with temporal-
logic-derived robustness margins, a counterfactual influence graph, and
four attack-drone fuzzing schemes that hunt for mission failures.
"""

from .campaign import (CampaignConfig, CampaignReport, export_trace,
                       robustness_curve_csv, run_campaign,
                       scheme_comparison_csv, summarize, trace_to_jsonl)
from .controllers import ApfNavigationController, DispersalSearchController
from .fuzzing import (SCHEMES, FuzzParams, FuzzResult, NoValidSpawn,
                      SpawnGeometry, TestCase, init_test_case,
                      lookahead_score, ma_next_testcase, run_fuzzing,
                      run_ma_fuzzing, run_random_fuzzing, run_sa_fuzzing,
                      run_target_only_fuzzing, sa_next_testcase,
                      spawn_candidates)
from .influence import (InfluenceGraph, KeyNodeSequence, NonConvergent,
                        build_influence_graph, cal_deviation, katz_centrality,
                        key_node_sequence)
from .mission import (ATTACKER_ID, OUTCOME_FAILURE, OUTCOME_SUCCESS,
                      OUTCOME_SWARM_SECURE, AttackerAction, Simulation, Trace,
                      run_mission)
from .planner import Infeasible, path_clearance, plan_path
from .robustness import (AgentRobustness, ConstraintParams, RobustnessRecord,
                         constraint_violations, individual_robustness,
                         margin_formation, margin_kinematics, margin_progress,
                         margin_safe_distance, swarm_robustness)
from .scenarios import (BUILTIN_SCENARIOS, ScenarioConfig, ScenarioError,
                        a1_navigate, a2_search, a3_navigate3d,
                        builtin_scenario, load_scenario,
                        measure_nominal_steps, scenario_from_dict)
from .world import (AgentState, FailureKind, InvalidState, MissionSpec,
                    Obstacle, WorldState, clamp_norm, detect_failure,
                    integrate_step, min_obstacle_distance)

__version__ = "0.1.0"
