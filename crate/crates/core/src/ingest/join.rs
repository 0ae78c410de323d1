//! Join of the two feeds: station-event runs become trajectories; each
//! trajectory claims the fixes of its vehicle-day that fall inside its
//! event window plus a fixed margin. The feeds share only (parc, date), so
//! overlapping trajectories of the same vehicle contend for fixes and the
//! nearest station event in time wins.

use super::{CourseEvent, GpsFix, RouteKey, Trace};
use std::collections::BTreeMap;

/// Fix-claim margin before the first and after the last station event,
/// seconds. Wide enough for clock skew between the two feeds, narrow enough
/// not to swallow an adjacent trajectory at typical layovers.
pub const CLAIM_MARGIN_S: u32 = 120;

#[derive(Debug)]
pub struct JoinOutcome {
    pub traces: Vec<Trace>,
    /// Trajectories whose window claimed no fix at all.
    pub orphans: Vec<RouteKey>,
    pub unassigned_fixes: usize,
}

/// Deterministic single pass: groups events into trajectories, then assigns
/// every fix of each vehicle-day to the trajectory whose nearest event is
/// closest in time among those whose window covers the fix.
pub fn join_datasets(events: Vec<CourseEvent>, fixes: Vec<GpsFix>) -> JoinOutcome {
    // Group events per trajectory.
    let mut by_key: BTreeMap<RouteKey, Vec<CourseEvent>> = BTreeMap::new();
    for e in events {
        let key = RouteKey {
            line: e.line.clone(),
            subline: e.subline.clone(),
            direction: e.direction,
            chain: e.chain.clone(),
            range: e.range.clone(),
            parc: e.parc.clone(),
            date: e.date,
        };
        by_key.entry(key).or_default().push(e);
    }
    for evs in by_key.values_mut() {
        evs.sort_by_key(|e| e.timestamp_s);
    }

    // Index trajectories per vehicle-day, ordered by first event time.
    let mut per_day: BTreeMap<(String, chrono::NaiveDate), Vec<RouteKey>> = BTreeMap::new();
    for key in by_key.keys() {
        per_day
            .entry((key.parc.clone(), key.date))
            .or_default()
            .push(key.clone());
    }
    for keys in per_day.values_mut() {
        keys.sort_by_key(|k| (by_key[k].first().map(|e| e.timestamp_s).unwrap_or(0), k.clone()));
    }

    let mut claimed: BTreeMap<RouteKey, Vec<GpsFix>> = BTreeMap::new();
    let mut unassigned = 0usize;
    for fix in fixes {
        let day_key = (fix.parc.clone(), fix.date);
        let Some(candidates) = per_day.get(&day_key) else {
            unassigned += 1;
            continue;
        };
        let mut best: Option<(u32, usize)> = None; // (gap to nearest event, candidate index)
        for (ci, key) in candidates.iter().enumerate() {
            let evs = &by_key[key];
            let first = evs.first().unwrap().timestamp_s;
            let last = evs.last().unwrap().timestamp_s;
            let window_lo = first.saturating_sub(CLAIM_MARGIN_S);
            let window_hi = last + CLAIM_MARGIN_S;
            if fix.timestamp_s < window_lo || fix.timestamp_s > window_hi {
                continue;
            }
            let gap = nearest_event_gap(evs, fix.timestamp_s);
            // Ties go to the earlier trajectory: candidate order is by
            // first event time, so strict less keeps the first winner.
            if best.map_or(true, |(bg, _)| gap < bg) {
                best = Some((gap, ci));
            }
        }
        match best {
            Some((_, ci)) => claimed
                .entry(candidates[ci].clone())
                .or_default()
                .push(fix),
            None => unassigned += 1,
        }
    }

    let mut traces = Vec::new();
    let mut orphans = Vec::new();
    for (key, station_events) in by_key {
        match claimed.remove(&key) {
            Some(mut fixes) if !fixes.is_empty() => {
                fixes.sort_by_key(|f| f.timestamp_s);
                // Strictly increasing timestamps: on duplicates keep the
                // first fix, which makes re-runs byte-identical.
                fixes.dedup_by_key(|f| f.timestamp_s);
                traces.push(Trace {
                    key,
                    fixes,
                    station_events,
                });
            }
            _ => orphans.push(key),
        }
    }

    JoinOutcome {
        traces,
        orphans,
        unassigned_fixes: unassigned,
    }
}

fn nearest_event_gap(events: &[CourseEvent], t: u32) -> u32 {
    let idx = events.partition_point(|e| e.timestamp_s < t);
    let mut best = u32::MAX;
    if idx < events.len() {
        best = best.min(events[idx].timestamp_s - t);
    }
    if idx > 0 {
        best = best.min(t - events[idx - 1].timestamp_s);
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::Direction;
    use chrono::NaiveDate;

    fn date() -> NaiveDate {
        NaiveDate::from_ymd_opt(2016, 3, 1).unwrap()
    }

    fn event(chain: &str, dir: Direction, t: u32) -> CourseEvent {
        CourseEvent {
            line: "12".into(),
            subline: "A".into(),
            chain: chain.into(),
            range: "r".into(),
            direction: dir,
            parc: "veh7".into(),
            date: date(),
            station_name: format!("st{t}"),
            timestamp_s: t,
        }
    }

    fn fix(t: u32) -> GpsFix {
        GpsFix {
            parc: "veh7".into(),
            date: date(),
            timestamp_s: t,
            lat: 48.85,
            lon: 2.35,
        }
    }

    #[test]
    fn fix_goes_to_nearest_trajectory_in_time() {
        // Windows [13:50, 14:10] and [15:00, 15:20]; fix at 14:00:05.
        let events = vec![
            event("t1", Direction::Outbound, 13 * 3600 + 50 * 60),
            event("t1", Direction::Outbound, 14 * 3600 + 10 * 60),
            event("t2", Direction::Inbound, 15 * 3600),
            event("t2", Direction::Inbound, 15 * 3600 + 20 * 60),
        ];
        let out = join_datasets(events, vec![fix(14 * 3600 + 5)]);
        assert_eq!(out.traces.len(), 1);
        assert_eq!(out.traces[0].key.chain, "t1");
        assert_eq!(out.orphans.len(), 1);
        assert_eq!(out.orphans[0].chain, "t2");
    }

    #[test]
    fn fix_outside_all_windows_is_unassigned() {
        let events = vec![
            event("t1", Direction::Outbound, 1000),
            event("t1", Direction::Outbound, 2000),
        ];
        let out = join_datasets(events, vec![fix(2000 + CLAIM_MARGIN_S + 1)]);
        assert_eq!(out.unassigned_fixes, 1);
        assert_eq!(out.orphans.len(), 1);
    }

    #[test]
    fn overlapping_windows_resolved_by_nearest_event() {
        // Trajectory A ends at 1000, B starts at 1100; both windows cover
        // 1000..=1100. A fix at 1020 is nearer A's last event, one at 1090
        // nearer B's first.
        let events = vec![
            event("A", Direction::Outbound, 500),
            event("A", Direction::Outbound, 1000),
            event("B", Direction::Inbound, 1100),
            event("B", Direction::Inbound, 1600),
        ];
        let out = join_datasets(events, vec![fix(1020), fix(1090)]);
        let a = out.traces.iter().find(|t| t.key.chain == "A").unwrap();
        let b = out.traces.iter().find(|t| t.key.chain == "B").unwrap();
        assert_eq!(a.fixes.len(), 1);
        assert_eq!(a.fixes[0].timestamp_s, 1020);
        assert_eq!(b.fixes.len(), 1);
        assert_eq!(b.fixes[0].timestamp_s, 1090);
    }

    #[test]
    fn no_fix_assigned_twice_and_join_is_total() {
        let events = vec![
            event("A", Direction::Outbound, 500),
            event("A", Direction::Outbound, 1000),
            event("B", Direction::Inbound, 1100),
            event("B", Direction::Inbound, 1600),
        ];
        let fixes: Vec<GpsFix> = (400..1800).step_by(13).map(fix).collect();
        let n = fixes.len();
        let out = join_datasets(events, fixes);
        let assigned: usize = out.traces.iter().map(|t| t.fixes.len()).sum();
        assert_eq!(assigned + out.unassigned_fixes, n);
        assert_eq!(out.traces.len() + out.orphans.len(), 2);
    }
}
