//! Named training-stage presets.
//!
//! Each preset bundles the objective, the data filter, the reward
//! configuration, clipping parameters, and the run constants (learning rate,
//! batch sizes, steps) of one stage. The run constants are inert metadata
//! here; this crate computes rewards and objective values, not updates.

use serde::{Deserialize, Serialize};

use super::{RewardConfig, RolloutGroup};

/// Which policy objective a stage optimizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    /// Clipped-ratio objective with asymmetric bounds.
    Dapo,
    /// Truncated-importance-sampling REINFORCE.
    Cispo,
}

/// Which group-level data filter a stage applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FilterStrategy {
    /// Drop only groups with no fully-rewarded (correct and formatted)
    /// response; all-correct groups stay in.
    IncludeEasy,
    /// Drop groups whose correctness flags are constant.
    RemoveEasy,
}

impl FilterStrategy {
    pub fn keep(&self, group: &RolloutGroup) -> bool {
        match self {
            FilterStrategy::IncludeEasy => super::filter_include_easy(group),
            FilterStrategy::RemoveEasy => super::filter_remove_easy(group),
        }
    }
}

/// One stage's full parameter bundle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StagePreset {
    pub name: &'static str,
    pub objective: Objective,
    pub filter: FilterStrategy,
    #[serde(flatten)]
    pub reward: RewardConfig,
    /// Lower clip bound; only the clipped-ratio objective uses it.
    pub eps_low: Option<f64>,
    /// Upper clip bound (clipped-ratio) or ratio truncation (REINFORCE).
    pub eps_high: f64,
    /// KL weight. Zero throughout the published runs; exposed for reuse.
    pub beta: f64,
    pub learning_rate: f64,
    pub rollout_batch_size: u32,
    pub train_batch_size: u32,
    pub steps: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub notes: Option<&'static str>,
}

/// Every named preset, in training order.
pub fn all_presets() -> Vec<StagePreset> {
    vec![
        StagePreset {
            name: "stage1",
            objective: Objective::Dapo,
            filter: FilterStrategy::IncludeEasy,
            reward: RewardConfig::standard(0.1, 2000, 7500),
            eps_low: Some(0.2),
            eps_high: 0.28,
            beta: 0.0,
            learning_rate: 7.071e-7,
            rollout_batch_size: 288,
            train_batch_size: 96,
            steps: 700,
            notes: None,
        },
        StagePreset {
            name: "stage2",
            objective: Objective::Cispo,
            filter: FilterStrategy::IncludeEasy,
            reward: RewardConfig::standard(0.1, 2000, 7500),
            eps_low: None,
            eps_high: 5.0,
            beta: 0.0,
            learning_rate: 1.414e-6,
            rollout_batch_size: 288,
            train_batch_size: 96,
            steps: 480,
            notes: Some(
                "after the first 200 steps the learning rate rises to 2.828e-6 \
                 and the train batch to 192",
            ),
        },
        StagePreset {
            name: "stage3",
            objective: Objective::Cispo,
            filter: FilterStrategy::RemoveEasy,
            reward: RewardConfig::standard(0.1, 2000, 7500),
            eps_low: None,
            eps_high: 5.0,
            beta: 0.0,
            learning_rate: 2e-6,
            rollout_batch_size: 288,
            train_batch_size: 96,
            steps: 240,
            notes: None,
        },
        StagePreset {
            name: "stage4",
            objective: Objective::Cispo,
            filter: FilterStrategy::RemoveEasy,
            reward: RewardConfig::standard(0.1, 6500, 12000),
            eps_low: None,
            eps_high: 5.0,
            beta: 0.0,
            learning_rate: 2e-6,
            rollout_batch_size: 360,
            train_batch_size: 96,
            steps: 220,
            notes: None,
        },
        StagePreset {
            name: "hlp",
            objective: Objective::Cispo,
            filter: FilterStrategy::RemoveEasy,
            reward: RewardConfig::hlp(0.9, 2000, 12000),
            eps_low: None,
            eps_high: 5.0,
            beta: 0.0,
            learning_rate: 2e-6,
            rollout_batch_size: 360,
            train_batch_size: 96,
            steps: 200,
            notes: None,
        },
        StagePreset {
            name: "dsr-hlp-24k",
            objective: Objective::Cispo,
            filter: FilterStrategy::RemoveEasy,
            reward: RewardConfig::hlp(0.9, 2000, 24000),
            eps_low: None,
            eps_high: 5.0,
            beta: 0.0,
            learning_rate: 2e-6,
            rollout_batch_size: 360,
            train_batch_size: 96,
            steps: 200,
            notes: Some("sequential baseline trained with the high length penalty at 24k"),
        },
        StagePreset {
            name: "dsr-hlp-12k",
            objective: Objective::Cispo,
            filter: FilterStrategy::RemoveEasy,
            reward: RewardConfig::hlp(0.9, 2000, 12000),
            eps_low: None,
            eps_high: 5.0,
            beta: 0.0,
            learning_rate: 2e-6,
            rollout_batch_size: 360,
            train_batch_size: 96,
            steps: 200,
            notes: Some("sequential baseline trained with the high length penalty at 12k"),
        },
    ]
}

/// Looks a preset up by name.
pub fn preset(name: &str) -> Option<StagePreset> {
    all_presets().into_iter().find(|p| p.name == name)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rlmath::RewardMode;

    #[test]
    fn all_preset_names_resolve() {
        for name in [
            "stage1",
            "stage2",
            "stage3",
            "stage4",
            "hlp",
            "dsr-hlp-12k",
            "dsr-hlp-24k",
        ] {
            assert!(preset(name).is_some(), "{name}");
        }
        assert!(preset("stage9").is_none());
    }

    #[test]
    fn stage_parameters_pin_the_schedule() {
        let s1 = preset("stage1").unwrap();
        assert_eq!(s1.objective, Objective::Dapo);
        assert_eq!(s1.filter, FilterStrategy::IncludeEasy);
        assert_eq!((s1.eps_low, s1.eps_high), (Some(0.2), 0.28));
        assert_eq!(
            (s1.reward.c_l, s1.reward.l_cutoff, s1.reward.l_max),
            (0.1, 2000, 7500)
        );

        let s3 = preset("stage3").unwrap();
        assert_eq!(s3.objective, Objective::Cispo);
        assert_eq!(s3.filter, FilterStrategy::RemoveEasy);
        assert_eq!(s3.eps_high, 5.0);
        assert_eq!(s3.reward.l_cutoff, 2000);

        let s4 = preset("stage4").unwrap();
        assert_eq!(
            (s4.reward.c_l, s4.reward.l_cutoff, s4.reward.l_max),
            (0.1, 6500, 12000)
        );

        let hlp = preset("hlp").unwrap();
        assert_eq!(hlp.reward.mode, RewardMode::Hlp);
        assert_eq!((hlp.reward.c_l, hlp.reward.l_cutoff), (0.9, 2000));
    }

    #[test]
    fn presets_serialize_with_flattened_reward() {
        let v = serde_json::to_value(preset("stage4").unwrap()).unwrap();
        assert_eq!(v["objective"], "cispo");
        assert_eq!(v["filter"], "remove_easy");
        assert_eq!(v["C_L"], 0.1);
        assert_eq!(v["L_cutoff"], 6500);
        assert_eq!(v["L_max"], 12000);
    }

    #[test]
    fn reward_configs_validate() {
        for p in all_presets() {
            p.reward.validate().unwrap();
        }
    }
}
