//! Versioned, checksummed campaign snapshots.
//!
//! A snapshot is a JSON envelope whose `payload` is itself a JSON string and
//! whose `checksum` is the SHA-256 of that string. Floats round-trip exactly,
//! so a loaded campaign continues along the same trajectory as the original.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::simulator::Campaign;
use crate::{Error, Result};

pub const FORMAT: &str = "tsched-snapshot";
pub const VERSION: u32 = 1;

/// A paused campaign plus what is needed to finish and label it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignSnapshot {
    pub scheduler: String,
    pub trial: u64,
    /// Steps the finished campaign will have.
    pub total_steps: u64,
    pub campaign: Campaign,
}

#[derive(Serialize, Deserialize)]
struct Envelope {
    format: String,
    version: u32,
    checksum: String,
    payload: String,
}

fn digest(payload: &str) -> String {
    hex::encode(Sha256::digest(payload.as_bytes()))
}

impl CampaignSnapshot {
    pub fn step(&self) -> u64 {
        self.campaign.steps_done()
    }

    pub fn to_json(&self) -> Result<String> {
        let payload = serde_json::to_string(self)?;
        let envelope = Envelope {
            format: FORMAT.into(),
            version: VERSION,
            checksum: digest(&payload),
            payload,
        };
        Ok(serde_json::to_string_pretty(&envelope)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let envelope: Envelope = serde_json::from_str(text)
            .map_err(|e| Error::CorruptSnapshot(format!("unreadable envelope: {e}")))?;
        if envelope.format != FORMAT {
            return Err(Error::CorruptSnapshot(format!(
                "not a snapshot (format `{}`)",
                envelope.format
            )));
        }
        if envelope.version != VERSION {
            return Err(Error::SnapshotVersion {
                expected: VERSION.to_string(),
                found: envelope.version.to_string(),
            });
        }
        if digest(&envelope.payload) != envelope.checksum {
            return Err(Error::CorruptSnapshot("checksum mismatch".into()));
        }
        let snap: Self = serde_json::from_str(&envelope.payload)
            .map_err(|e| Error::CorruptSnapshot(format!("unreadable payload: {e}")))?;
        if snap.step() > snap.total_steps {
            return Err(Error::CorruptSnapshot("step counter past total".into()));
        }
        Ok(snap)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coverage::InterestingPolicy;
    use crate::schedulers::SchedulerKind;
    use crate::simulator::{BernoulliArms, CfgTarget};

    fn fuzz_snapshot(kind: SchedulerKind) -> CampaignSnapshot {
        let target = CfgTarget::chain(8, 0.3).unwrap();
        let mut campaign = Campaign::fuzz(target, kind, InterestingPolicy::NewFeature, 4).unwrap();
        campaign.run_until(60).unwrap();
        CampaignSnapshot {
            scheduler: kind.name().into(),
            trial: 0,
            total_steps: 120,
            campaign,
        }
    }

    #[test]
    fn resumed_campaign_matches_uninterrupted_run() {
        for kind in SchedulerKind::ALL {
            let snap = fuzz_snapshot(kind);
            let mut straight = snap.campaign.clone();
            straight.run_until(120).unwrap();

            let mut resumed = CampaignSnapshot::from_json(&snap.to_json().unwrap()).unwrap();
            assert_eq!(resumed, snap);
            resumed.campaign.run_until(120).unwrap();
            assert_eq!(resumed.campaign.log, straight.log, "{kind}");
        }
    }

    #[test]
    fn bandit_snapshot_round_trips() {
        let arms = BernoulliArms::new(vec![0.2, 0.5, 0.55]).unwrap();
        let mut c = Campaign::bandit(arms, SchedulerKind::Sample, 8).unwrap();
        c.run_until(40).unwrap();
        let snap = CampaignSnapshot {
            scheduler: "sample".into(),
            trial: 3,
            total_steps: 40,
            campaign: c,
        };
        let back = CampaignSnapshot::from_json(&snap.to_json().unwrap()).unwrap();
        assert_eq!(back, snap);
        assert_eq!(back.to_json().unwrap(), snap.to_json().unwrap());
    }

    #[test]
    fn tampered_payload_fails_checksum() {
        let text = fuzz_snapshot(SchedulerKind::RareMinus).to_json().unwrap();
        let i = text.find("\"alpha").expect("posterior in payload");
        let mut bytes = text.into_bytes();
        bytes[i + 1] = b'A';
        let err = CampaignSnapshot::from_json(std::str::from_utf8(&bytes).unwrap()).unwrap_err();
        assert!(matches!(err, Error::CorruptSnapshot(m) if m.contains("checksum")));
    }

    #[test]
    fn wrong_version_is_reported() {
        let text = fuzz_snapshot(SchedulerKind::Greedy).to_json().unwrap();
        let text = text.replacen("\"version\": 1", "\"version\": 2", 1);
        assert!(matches!(
            CampaignSnapshot::from_json(&text),
            Err(Error::SnapshotVersion { .. })
        ));
    }

    #[test]
    fn garbage_is_corrupt() {
        assert!(matches!(
            CampaignSnapshot::from_json("{not json"),
            Err(Error::CorruptSnapshot(_))
        ));
    }
}
