//! Descriptive analytics: comment delays, label time series, channel
//! concentration and per-user label geometry.

mod concentration;
mod delays;
mod dip;
mod timeseries;
mod users;

use serde::Serialize;

use crate::corpus::Category;
use crate::label::HateLabel;

pub use concentration::{concentration_curve, ConcentrationCurve, ConcentrationPoint};
pub use delays::{
    bootstrap_delay, bootstrap_means, comment_delay, delay_stats, delays_of, BootstrapConfig,
    BootstrapStats, DelayQuality, DelayStats, Grouping,
};
pub use dip::{dip_statistic, dip_test, DipTest};
pub use timeseries::{label_timeseries, BinWidth, LabelTimeBin};
pub use users::{
    group_distribution, joint_density, triangle_projection, user_profiles, DensityGrid,
    GroupDistribution, LeaningInterval, UserProfile,
};

/// Subset of comments selected by label and/or channel category.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Default)]
pub struct GroupKey {
    pub label: Option<HateLabel>,
    pub category: Option<Category>,
}

impl GroupKey {
    pub const ALL: GroupKey = GroupKey {
        label: None,
        category: None,
    };

    pub fn matches(&self, label: Option<HateLabel>, category: Category) -> bool {
        self.label.is_none_or(|l| label == Some(l)) && self.category.is_none_or(|c| c == category)
    }

    /// `all`, `questionable`, `V`, `reliable/A`, ...
    pub fn name(&self) -> String {
        match (self.category, self.label) {
            (None, None) => "all".into(),
            (Some(c), None) => c.as_str().into(),
            (None, Some(l)) => l.code().into(),
            (Some(c), Some(l)) => format!("{}/{}", c.as_str(), l.code()),
        }
    }

    pub(crate) fn stream_tag(&self) -> u64 {
        crate::seed::tag(&self.name())
    }
}
