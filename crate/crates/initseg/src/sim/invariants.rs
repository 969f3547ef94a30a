//! The runtime invariant checker for construction traces: appropriateness
//! of receptions, specialness of designated path arrays, one growth per
//! stage, transmission discipline, root nesting, and the no-hanging rule.

use std::fmt;

use crate::tree::{is_focal, is_potential_focal};

use super::{priority_cmp, Node, Phase, Simulation};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Severity {
    Hard,
    Warning,
}

#[derive(Clone, Debug)]
pub struct Violation {
    pub stage: usize,
    pub rule: &'static str,
    pub severity: Severity,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Hard => "violation",
            Severity::Warning => "warning",
        };
        write!(f, "stage {} {} [{}]: {}", self.stage, sev, self.rule, self.detail)
    }
}

/// Reception appropriateness, checked against the receiving node's pre-act
/// tree.
pub fn check_reception(
    _ctx: &super::SimContext,
    node: &Node,
    received: &[(Vec<usize>, u32)],
    stage: usize,
    out: &mut Vec<Violation>,
) {
    if node.tree.is_empty() {
        return;
    }
    let tree = &node.tree;
    for (alpha, i) in received {
        if !tree.on_tree(alpha) {
            out.push(Violation {
                stage,
                rule: "reception.on-tree",
                severity: Severity::Hard,
                detail: format!("{:?} received a string off its tree", node.path),
            });
            continue;
        }
        let ht = tree.height().unwrap_or(0);
        if *i == 0 && alpha.len() >= ht {
            out.push(Violation {
                stage,
                rule: "reception.depth",
                severity: Severity::Hard,
                detail: format!("{:?} received a grow request at its top", node.path),
            });
        }
        if *i == 1 {
            let ok = tree
                .preimage(alpha)
                .map_or(false, |p| is_potential_focal(tree, p) && !is_focal(tree, p));
            if !ok {
                out.push(Violation {
                    stage,
                    rule: "reception.focal",
                    severity: Severity::Hard,
                    detail: format!(
                        "{:?} received a create request for a non-potential focal point",
                        node.path
                    ),
                });
            }
        }
    }
    for (a1, _) in received {
        for (a2, _) in received {
            let cmp = (a1.len() <= a2.len() && a2[..a1.len()] == **a1)
                || (a2.len() <= a1.len() && a1[..a2.len()] == **a2);
            if !cmp {
                out.push(Violation {
                    stage,
                    rule: "reception.comparable",
                    severity: Severity::Hard,
                    detail: format!("{:?} received incomparable strings", node.path),
                });
            }
        }
    }
}

/// Stage-level checks, run after all nodes acted and triggers resolved.
pub fn check_stage(
    sim: &mut Simulation<'_>,
    stage: usize,
    trigger_fired: bool,
    cancellations: &mut Vec<super::Path>,
) {
    let mut out = Vec::new();
    let nodes: Vec<&Node> = sim.nodes.values().filter(|n| !n.cancelled).collect();

    // One (non-Ext, non-newly-designated) growth per stage, and growth
    // implies a trigger at the same stage.
    let growers: Vec<&Node> = nodes
        .iter()
        .copied()
        .filter(|n| {
            n.grew
                && !matches!(n.designation, super::Designation::Ext(_))
                && n.designated_at != stage
        })
        .collect();
    if growers.len() > 1 {
        out.push(Violation {
            stage,
            rule: "growth.single",
            severity: Severity::Hard,
            detail: format!(
                "{} trees grew: {:?}",
                growers.len(),
                growers.iter().map(|n| n.path.clone()).collect::<Vec<_>>()
            ),
        });
    }
    for g in &growers {
        // Root fills of strategies entering their working phase are the
        // "newly nonempty" case and self-trigger through Subcase 3.
        if g.prev_tree.is_empty() {
            continue;
        }
        if !trigger_fired {
            out.push(Violation {
                stage,
                rule: "growth.trigger",
                severity: Severity::Hard,
                detail: format!("{:?} grew without a trigger", g.path),
            });
        }
    }

    // Transmission discipline: at most one pair per non-Ext node; sibling
    // and parent-sibling containment.
    for n in &nodes {
        if !matches!(n.designation, super::Designation::Ext(_)) && n.transmitted.len() > 1 {
            out.push(Violation {
                stage,
                rule: "transmit.single",
                severity: Severity::Hard,
                detail: format!("{:?} transmitted {} pairs", n.path, n.transmitted.len()),
            });
        }
        // State monotonicity between growth events.
        if !n.grew
            && n.state != n.prev_state
            && n.designated_at != stage
            && n.prev_state > n.state
        {
            out.push(Violation {
                stage,
                rule: "state.monotone",
                severity: Severity::Hard,
                detail: format!("{:?} state moved backward {:?} -> {:?}", n.path, n.prev_state, n.state),
            });
        }
    }

    // 45(ii)/(iv): for λ = λ⁻*(a+1): the left sibling transmits a unique
    // high pair matching λ's root; higher-priority sibling transmissions
    // sit below λ's root.
    for n in &nodes {
        if n.path.is_empty() || *n.path.last().unwrap() == 0 {
            continue;
        }
        if n.designated_at == stage {
            continue;
        }
        let mut p = n.path.clone();
        let last = p.pop().unwrap();
        p.push(last - 1);
        match sim.nodes.get(&p) {
            Some(left) if !left.cancelled => {
                let highs: Vec<&(Vec<usize>, u32)> =
                    left.transmitted.iter().filter(|(_, i)| *i >= 2).collect();
                if highs.len() != 1 {
                    out.push(Violation {
                        stage,
                        rule: "transmit.sibling-unique",
                        severity: Severity::Hard,
                        detail: format!(
                            "{:?} expects one high transmission from {:?}, saw {}",
                            n.path,
                            p,
                            highs.len()
                        ),
                    });
                } else if let Some(root) = n.root_image() {
                    let (sigma, _) = highs[0];
                    if root.len() < sigma.len() || root[..sigma.len()] != sigma[..] {
                        out.push(Violation {
                            stage,
                            rule: "transmit.sibling-root",
                            severity: Severity::Hard,
                            detail: format!("{:?} root does not extend the sibling request", n.path),
                        });
                    }
                }
            }
            _ => {}
        }
    }

    // 46(ii): root nesting along priorities; re-checked only when one of
    // the two trees changed this stage.
    for a in &nodes {
        for b in &nodes {
            let changed = !std::rc::Rc::ptr_eq(&a.tree, &a.prev_tree)
                || !std::rc::Rc::ptr_eq(&b.tree, &b.prev_tree)
                || a.designated_at == stage
                || b.designated_at == stage;
            if changed && priority_cmp(&a.path, &b.path) == std::cmp::Ordering::Less {
                if let (Some(ra), Some(rb)) = (a.root_image(), b.root_image()) {
                    if !(rb.len() >= ra.len() && rb[..ra.len()] == ra[..]) {
                        out.push(Violation {
                            stage,
                            rule: "roots.nested",
                            severity: Severity::Hard,
                            detail: format!(
                                "root of {:?} does not extend root of {:?}",
                                b.path, a.path
                            ),
                        });
                    }
                }
            }
        }
    }

    // 47(i): empty designated trees are Phase-1-like; their children are
    // not designated.
    for n in &nodes {
        if n.tree.is_empty() {
            let phase = n.designation.effective_phase(true);
            if !(phase == Phase::One || n.designated_at == stage) {
                out.push(Violation {
                    stage,
                    rule: "empty.phase1",
                    severity: Severity::Hard,
                    detail: format!("{:?} is empty but designated {}", n.path, n.designation.kind()),
                });
            }
            let has_child = nodes.iter().any(|c| {
                c.path.len() == n.path.len() + 1 && c.path[..n.path.len()] == n.path[..]
            });
            if has_child {
                out.push(Violation {
                    stage,
                    rule: "empty.childless",
                    severity: Severity::Hard,
                    detail: format!("empty {:?} has designated children", n.path),
                });
            }
        }
    }

    // Def 29 specialness of every designated path array, per stage pair.
    // Subtree-ness only changes when one of the trees changed, so the scan
    // is change-driven: each node is checked against its direct parent.
    for n in &nodes {
        if n.path.is_empty() {
            continue;
        }
        let parent = &n.path[..n.path.len() - 1];
        let p = match sim.nodes.get(parent) {
            Some(p) if !p.cancelled => p,
            _ => continue,
        };
        let changed = !std::rc::Rc::ptr_eq(&n.tree, &n.prev_tree)
            || !std::rc::Rc::ptr_eq(&p.tree, &p.prev_tree)
            || n.designated_at == stage;
        if changed && !n.tree.is_empty() && !n.tree.subtree_of(&p.tree) {
            out.push(Violation {
                stage,
                rule: "special.nested",
                severity: Severity::Hard,
                detail: format!("{:?} is not a subtree of its parent", n.path),
            });
        }
        if !std::rc::Rc::ptr_eq(&n.tree, &n.prev_tree)
            && !n.prev_tree.is_empty()
            && !n.prev_tree.subtree_of(&n.tree)
        {
            out.push(Violation {
                stage,
                rule: "special.monotone",
                severity: Severity::Hard,
                detail: format!("{:?} shrank", n.path),
            });
        }
        // Growth height sync: a grown tree reaches the heights of everything
        // below it on its path.
        if n.grew && !n.prev_tree.is_empty() && n.designated_at != stage {
            for d in 0..n.path.len() {
                if let Some(anc) = sim.nodes.get(&n.path[..d].to_vec()) {
                    if !anc.cancelled
                        && !anc.tree.is_empty()
                        && anc.height() != n.height()
                        && !matches!(anc.designation, super::Designation::Ext(_))
                    {
                        out.push(Violation {
                            stage,
                            rule: "special.height-sync",
                            severity: Severity::Hard,
                            detail: format!(
                                "{:?} grew to height {} but {:?} sits at {}",
                                n.path,
                                n.height(),
                                anc.path,
                                anc.height()
                            ),
                        });
                    }
                }
            }
        }
    }
    let _ = cancellations;
    sim.violations.extend(out);
}

/// Hard violations only.
pub fn hard_violations(violations: &[Violation]) -> Vec<&Violation> {
    violations.iter().filter(|v| v.severity == Severity::Hard).collect()
}
