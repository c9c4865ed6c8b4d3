//! Waterfilling power allocation and multi-queue channel assignment.
//!
//! The per-slot power problem maximizes a weighted sum of channel rates under
//! a total power budget. Its dual has a closed-form water level
//! `λ = Σ w_i / (P_max + Σ 1/h_i)` over the set of channels that receive
//! positive power, and the optimal powers are `P_i = w_i (1/λ − 1/(w_i h_i))⁺`.
//! The water level is found by sorting channels by `w_i h_i` and shrinking the
//! active set until the level drops below the weakest member.
//!
//! Rates are reported in bits/slot (base-2 logarithm). The waterfilling
//! algebra itself is logarithm-base agnostic: the optimal powers and the water
//! level do not change when the objective is scaled by the constant `1/ln 2`.

use crate::error::{Result, SimError};

/// A transmission candidate: posterior/queue weight and fading gain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightedChannel {
    /// Caller-side channel identifier, carried through to the plan.
    pub id: usize,
    /// Positive weight (posterior idle probability, possibly scaled by a
    /// queue length in multi-queue mode).
    pub weight: f64,
    /// Positive channel gain.
    pub gain: f64,
}

/// Power granted to one candidate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Allocation {
    pub id: usize,
    pub weight: f64,
    pub gain: f64,
    /// Power granted; zero for candidates below the water level.
    pub power: f64,
    /// Rate if the channel transmits, `log2(1 + gain * power)`, bits/slot.
    pub rate: f64,
}

/// Result of the waterfilling solve. Allocations keep the input order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PowerPlan {
    /// Water level of the active set; `None` when nothing is active.
    pub water_level: Option<f64>,
    pub allocations: Vec<Allocation>,
}

impl PowerPlan {
    pub fn total_power(&self) -> f64 {
        self.allocations.iter().map(|a| a.power).sum()
    }

    /// Ids of channels that received positive power.
    pub fn active_ids(&self) -> Vec<usize> {
        self.allocations
            .iter()
            .filter(|a| a.power > 0.0)
            .map(|a| a.id)
            .collect()
    }
}

/// Channel-to-queue assignment; at most one queue per channel.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Assignment {
    /// Per input channel, the queue it serves (only channels with positive
    /// power are assigned).
    pub channel_queue: Vec<Option<usize>>,
}

impl Assignment {
    /// Dense 0/1 matrix view, channels x queues.
    pub fn matrix(&self, n_queues: usize) -> Vec<Vec<u8>> {
        self.channel_queue
            .iter()
            .map(|q| {
                let mut row = vec![0u8; n_queues];
                if let Some(j) = q {
                    row[*j] = 1;
                }
                row
            })
            .collect()
    }
}

/// Solves the weighted waterfilling problem over `channels` with total budget
/// `p_max`.
///
/// The active set is the largest prefix (in decreasing `w·h` order) whose
/// closed-form water level stays below the boundary member's `w·h`. An empty
/// candidate list yields an empty plan with no water level.
pub fn waterfill(channels: &[WeightedChannel], p_max: f64) -> Result<PowerPlan> {
    if p_max <= 0.0 || !p_max.is_finite() {
        return Err(SimError::Domain(format!(
            "power budget must be positive and finite, got {p_max}"
        )));
    }
    for c in channels {
        if !(c.gain > 0.0) || !c.gain.is_finite() {
            return Err(SimError::Domain(format!(
                "channel {} has non-positive gain {}",
                c.id, c.gain
            )));
        }
        if !(c.weight > 0.0) || !c.weight.is_finite() {
            return Err(SimError::Domain(format!(
                "channel {} has non-positive weight {}",
                c.id, c.weight
            )));
        }
    }
    if channels.is_empty() {
        return Ok(PowerPlan::default());
    }

    let mut order: Vec<usize> = (0..channels.len()).collect();
    order.sort_by(|&a, &b| {
        let wa = channels[a].weight * channels[a].gain;
        let wb = channels[b].weight * channels[b].gain;
        wb.total_cmp(&wa).then(channels[a].id.cmp(&channels[b].id))
    });

    let mut weight_sum: Vec<f64> = Vec::with_capacity(channels.len());
    let mut inv_gain_sum: Vec<f64> = Vec::with_capacity(channels.len());
    let mut w_acc = 0.0;
    let mut h_acc = 0.0;
    for &k in &order {
        w_acc += channels[k].weight;
        h_acc += 1.0 / channels[k].gain;
        weight_sum.push(w_acc);
        inv_gain_sum.push(h_acc);
    }

    let level = |m: usize| weight_sum[m - 1] / (p_max + inv_gain_sum[m - 1]);
    let mut m = channels.len();
    let mut lambda = level(m);
    while m >= 1 {
        let c = &channels[order[m - 1]];
        if lambda < c.weight * c.gain {
            break;
        }
        m -= 1;
        if m >= 1 {
            lambda = level(m);
        }
    }

    let mut allocations: Vec<Allocation> = channels
        .iter()
        .map(|c| Allocation {
            id: c.id,
            weight: c.weight,
            gain: c.gain,
            power: 0.0,
            rate: 0.0,
        })
        .collect();
    if m == 0 {
        return Ok(PowerPlan {
            water_level: None,
            allocations,
        });
    }
    for &k in order.iter().take(m) {
        let c = &channels[k];
        let p = c.weight * (1.0 / lambda - 1.0 / (c.weight * c.gain));
        let p = p.max(0.0);
        allocations[k].power = p;
        allocations[k].rate = (1.0 + c.gain * p).log2();
    }
    Ok(PowerPlan {
        water_level: Some(lambda),
        allocations,
    })
}

/// Weighted natural-log objective achieved by a plan:
/// `Σ w_i ln(1 + h_i P_i)` over active channels.
pub fn plan_objective(plan: &PowerPlan) -> f64 {
    plan.allocations
        .iter()
        .filter(|a| a.power > 0.0)
        .map(|a| a.weight * (1.0 + a.gain * a.power).ln())
        .sum()
}

/// Greedy channel-to-queue assignment followed by waterfilling.
///
/// Every channel starts as a candidate for the longest queue. After each
/// waterfilling pass, a channel priced out at its candidate (its scaled
/// `w·Q·h` does not clear the water level) re-candidates to the longest queue
/// that does clear it, if any. Each move strictly decreases the candidate's
/// queue length, so the loop finishes within channels x queues passes.
///
/// Queue-length ties break toward the larger gain, then the lower queue index.
///
/// `gains` is indexed `[channel][queue]`. Weights and the power budget follow
/// [`waterfill`]'s conventions; the per-channel waterfilling weight is
/// `weights[i] * queues[candidate]`.
pub fn assign_and_waterfill(
    queues: &[f64],
    gains: &[Vec<f64>],
    weights: &[f64],
    p_max: f64,
) -> Result<(Assignment, PowerPlan)> {
    let n = gains.len();
    let j_count = queues.len();
    if j_count == 0 {
        return Err(SimError::Domain("at least one queue required".into()));
    }
    if weights.len() != n {
        return Err(SimError::Domain(format!(
            "weights length {} does not match {} channels",
            weights.len(),
            n
        )));
    }
    for (i, row) in gains.iter().enumerate() {
        if row.len() != j_count {
            return Err(SimError::Domain(format!(
                "gain row {} has {} entries, expected {}",
                i,
                row.len(),
                j_count
            )));
        }
    }

    let empty = |n: usize| {
        (
            Assignment {
                channel_queue: vec![None; n],
            },
            PowerPlan::default(),
        )
    };
    if n == 0 || queues.iter().all(|&q| q <= 0.0) {
        return Ok(empty(n));
    }

    // Longest queue first; gain then queue index break ties.
    let best_queue = |i: usize, clears: &dyn Fn(usize) -> bool| -> Option<usize> {
        let mut best: Option<usize> = None;
        for j in 0..j_count {
            if queues[j] <= 0.0 || !clears(j) {
                continue;
            }
            best = match best {
                None => Some(j),
                Some(b) => {
                    let cmp = queues[j]
                        .total_cmp(&queues[b])
                        .then(gains[i][j].total_cmp(&gains[i][b]));
                    if cmp == std::cmp::Ordering::Greater {
                        Some(j)
                    } else {
                        Some(b)
                    }
                }
            };
        }
        best
    };

    let mut candidate: Vec<Option<usize>> = (0..n).map(|i| best_queue(i, &|_| true)).collect();

    let cap = n * j_count + 1;
    let mut plan = PowerPlan::default();
    for _pass in 0..cap {
        let weighted: Vec<WeightedChannel> = candidate
            .iter()
            .enumerate()
            .filter_map(|(i, q)| {
                q.map(|j| WeightedChannel {
                    id: i,
                    weight: weights[i] * queues[j],
                    gain: gains[i][j],
                })
            })
            .collect();
        plan = waterfill(&weighted, p_max)?;
        let lambda = match plan.water_level {
            Some(l) => l,
            None => break,
        };
        let mut granted = vec![false; n];
        for a in &plan.allocations {
            if a.power > 0.0 {
                granted[a.id] = true;
            }
        }
        let mut changed = false;
        for i in 0..n {
            let Some(j) = candidate[i] else { continue };
            if granted[i] {
                continue;
            }
            let next = best_queue(i, &|q| weights[i] * queues[q] * gains[i][q] > lambda);
            if next != Some(j) {
                candidate[i] = next;
                changed = true;
            }
        }
        if !changed {
            // Fixed point: drop channels that still clear nothing.
            let assignment = Assignment {
                channel_queue: (0..n)
                    .map(|i| if granted[i] { candidate[i] } else { None })
                    .collect(),
            };
            let mut full = PowerPlan {
                water_level: plan.water_level,
                allocations: (0..n)
                    .map(|i| Allocation {
                        id: i,
                        weight: weights[i],
                        gain: candidate[i].map(|j| gains[i][j]).unwrap_or(0.0),
                        power: 0.0,
                        rate: 0.0,
                    })
                    .collect(),
            };
            for a in &plan.allocations {
                full.allocations[a.id] = *a;
            }
            return Ok((assignment, full));
        }
    }
    if plan.water_level.is_none() {
        return Ok(empty(n));
    }
    Err(SimError::Internal(
        "channel assignment failed to reach a fixed point".into(),
    ))
}

/// Total served rate given per-channel transmission success flags, capped at
/// `r_max`.
///
/// `flags` must align with `plan.allocations`.
pub fn realized_rate(plan: &PowerPlan, flags: &[bool], r_max: f64) -> Result<f64> {
    if flags.len() != plan.allocations.len() {
        return Err(SimError::Domain(format!(
            "{} flags for {} planned channels",
            flags.len(),
            plan.allocations.len()
        )));
    }
    let r: f64 = plan
        .allocations
        .iter()
        .zip(flags)
        .filter(|(_, &f)| f)
        .map(|(a, _)| a.rate)
        .sum();
    Ok(r.min(r_max))
}
