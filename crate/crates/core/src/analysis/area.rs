#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AreaConfig {
    /// 64 engines with scratchpads and Top-K units, mm².
    pub logic_area_mm2: f64,
    /// PHYs and memory controllers, mm².
    pub phy_mc_area_mm2: f64,
    pub lpddr_shoreline_mm: f64,
    pub pcie_shoreline_mm: f64,
    /// Shoreline of one LPDDR5X channel PHY.
    pub channel_phy_shoreline_mm: f64,
}

impl Default for AreaConfig {
    fn default() -> Self {
        Self {
            logic_area_mm2: 3.4,
            phy_mc_area_mm2: 14.0,
            lpddr_shoreline_mm: 20.0,
            pcie_shoreline_mm: 1.0,
            channel_phy_shoreline_mm: 2.5,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AreaReport {
    pub logic_area: f64,
    pub phy_mc_area: f64,
    pub shoreline: f64,
    /// Square die whose perimeter equals the shoreline.
    pub min_die_area: f64,
    pub reported: f64,
}

pub fn square_die_area(perimeter_mm: f64) -> f64 {
    let side = perimeter_mm / 4.0;
    side * side
}

pub fn area_model(cfg: &AreaConfig) -> AreaReport {
    let shoreline = cfg.lpddr_shoreline_mm + cfg.pcie_shoreline_mm;
    let min_die_area = square_die_area(shoreline);
    let content = cfg.logic_area_mm2 + cfg.phy_mc_area_mm2;
    AreaReport {
        logic_area: cfg.logic_area_mm2,
        phy_mc_area: cfg.phy_mc_area_mm2,
        shoreline,
        min_die_area,
        reported: content.max(min_die_area),
    }
}

/// Die area of a single chip driving `channels` LPDDR5X channels.
pub fn monolithic_area(channels: usize, cfg: &AreaConfig) -> f64 {
    square_die_area(channels as f64 * cfg.channel_phy_shoreline_mm)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_die_is_shoreline_bound() {
        let a = area_model(&AreaConfig::default());
        assert_eq!(a.shoreline, 21.0);
        assert_eq!(a.min_die_area, 27.5625);
        assert_eq!(a.reported, 27.5625);
    }

    #[test]
    fn monolithic_counterfactual() {
        let cfg = AreaConfig::default();
        assert_eq!(monolithic_area(64, &cfg), 1600.0);
        assert_eq!(square_die_area(160.0), 1600.0);
        // eight channels per NMA fill the LPDDR shoreline
        assert_eq!(8.0 * cfg.channel_phy_shoreline_mm, cfg.lpddr_shoreline_mm);
    }

    #[test]
    fn no_shoreline_means_content_area() {
        let cfg = AreaConfig {
            lpddr_shoreline_mm: 0.0,
            pcie_shoreline_mm: 0.0,
            ..AreaConfig::default()
        };
        let a = area_model(&cfg);
        assert_eq!(a.min_die_area, 0.0);
        assert!((a.reported - 17.4).abs() < 1e-12);
    }
}
