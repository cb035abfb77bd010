"""Max-3SAT(k) formulas to bounded-degree graphs to 3-uniform datasets."""
from dppmle.reduction.bot import (BotGraph, CountAudit, Gadget, LiteralPair, Node,
                                  bot_graph_from_json, build_bot_graph, count_audit,
                                  expected_counts, load_bot_graph, without_edges)
from dppmle.reduction.cnf import CnfFormula, parse_dimacs, random_formula, solve
from dppmle.reduction.damage import DamageReport, TrimReport, classify_damage, trim_dense
from dppmle.reduction.expander import ExpanderAudit, ExpanderSpec, build_expander
from dppmle.reduction.lift import LiftedInstance, lift_to_hypergraph
