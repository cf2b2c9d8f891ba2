use chrono::{NaiveDateTime, NaiveTime, Timelike};

/// A half-open `[start, end)` range of wall-clock time that may wrap past midnight.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClockWindow {
    start_s: u32,
    end_s: u32,
}

impl ClockWindow {
    pub const fn hours(start: u32, end: u32) -> Self {
        ClockWindow {
            start_s: start * 3600,
            end_s: end * 3600,
        }
    }

    pub fn contains_time(&self, t: NaiveTime) -> bool {
        let s = t.num_seconds_from_midnight();
        if self.start_s <= self.end_s {
            s >= self.start_s && s < self.end_s
        } else {
            s >= self.start_s || s < self.end_s
        }
    }

    pub fn contains(&self, ts: &NaiveDateTime) -> bool {
        self.contains_time(ts.time())
    }
}

/// Nocturnal hours for bathroom visits and awakenings: 21:00–07:00.
pub const NOCTURNAL: ClockWindow = ClockWindow::hours(21, 7);
/// Nocturnal hours for non-bathroom movement: 22:00–07:00.
pub const NOCTURNAL_LATE: ClockWindow = ClockWindow::hours(22, 7);
/// Daytime hours for the daytime transit statistics: 07:00–21:00.
pub const DAYTIME: ClockWindow = ClockWindow::hours(7, 21);
/// Early-morning awakenings are activity strictly before 06:00.
pub const EARLY_MORNING: ClockWindow = ClockWindow::hours(0, 6);

/// Signed elapsed seconds from `a` to `b`, keeping sub-second precision.
pub fn seconds_between(a: &NaiveDateTime, b: &NaiveDateTime) -> f64 {
    let d = *b - *a;
    d.num_milliseconds() as f64 / 1000.0
}
