use serde::{Deserialize, Serialize};

/// Counters accumulated by a [`super::VecEngine`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CostReport {
    /// Trips of the algorithm's main vectorized loop.
    pub loop_iterations: u64,
    pub vector_instructions: u64,
    /// Sum of VL over all issued instructions.
    pub lane_slots_total: u64,
    /// Sum of unmasked lanes over all issued instructions.
    pub lane_slots_active: u64,
    /// Lane slots of multiply/FMA instructions, masked or not.
    pub elements_processed: u64,
    pub gather_scatter_ops: u64,
    /// Largest `max - min` index span among the unmasked lanes of a single
    /// gather or scatter.
    pub max_index_range: u64,
}

impl CostReport {
    /// Fraction of issued lane slots that did useful work.
    pub fn utilization(&self) -> f64 {
        if self.lane_slots_total == 0 {
            1.0
        } else {
            self.lane_slots_active as f64 / self.lane_slots_total as f64
        }
    }

    /// Look up a counter by its serialized name.
    pub fn metric(&self, name: &str) -> Option<u64> {
        Some(match name {
            "loop_iterations" => self.loop_iterations,
            "vector_instructions" => self.vector_instructions,
            "lane_slots_total" => self.lane_slots_total,
            "lane_slots_active" => self.lane_slots_active,
            "elements_processed" => self.elements_processed,
            "gather_scatter_ops" => self.gather_scatter_ops,
            "max_index_range" => self.max_index_range,
            _ => return None,
        })
    }

    pub const FIELDS: [&'static str; 7] = [
        "loop_iterations",
        "vector_instructions",
        "lane_slots_total",
        "lane_slots_active",
        "elements_processed",
        "gather_scatter_ops",
        "max_index_range",
    ];
}
