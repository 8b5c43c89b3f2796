use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::RenderError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Material {
    Lambertian,
    Glossy { glossiness: f64 },
    Metallic { glossiness: f64, metalness: f64 },
}

impl Material {
    /// Preset by name: `lambertian`, `glossy` (glossiness 0.8) or `metallic`
    /// (glossiness 0.6, metalness 0.8).
    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "lambertian" => Some(Material::Lambertian),
            "glossy" => Some(Material::Glossy { glossiness: 0.8 }),
            "metallic" => Some(Material::Metallic {
                glossiness: 0.6,
                metalness: 0.8,
            }),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Material::Lambertian => "lambertian",
            Material::Glossy { .. } => "glossy",
            Material::Metallic { .. } => "metallic",
        }
    }

    /// (glossiness, metalness); both zero for the lambertian material.
    pub fn parameters(&self) -> (f64, f64) {
        match *self {
            Material::Lambertian => (0.0, 0.0),
            Material::Glossy { glossiness } => (glossiness, 0.0),
            Material::Metallic { glossiness, metalness } => (glossiness, metalness),
        }
    }
}

/// Where surface color comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Albedo {
    Texture,
    /// Texture ignored; every surface is white.
    White,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RenderConfig {
    pub width: u32,
    pub height: u32,
    /// Vertical field of view in degrees.
    pub fov_deg: f64,
    /// Direction towards the light in the camera frame: azimuth from the view axis towards
    /// the right, elevation upwards.
    pub light_azimuth_deg: f64,
    pub light_elevation_deg: f64,
    pub light_intensity: f64,
    pub ambient: f64,
    pub material: Material,
    pub background: u8,
    pub mipmap: bool,
    pub albedo: Albedo,
    /// When false the shade is 1 everywhere and only albedo is rendered.
    pub lit: bool,
    pub main_azimuth_deg: f64,
    pub main_elevation_deg: f64,
}

impl Default for RenderConfig {
    fn default() -> Self {
        Self {
            width: 650,
            height: 550,
            fov_deg: 30.0,
            light_azimuth_deg: 45.0,
            light_elevation_deg: 45.0,
            light_intensity: 1.0,
            ambient: 0.15,
            material: Material::Lambertian,
            background: 200,
            mipmap: true,
            albedo: Albedo::Texture,
            lit: true,
            main_azimuth_deg: 0.0,
            main_elevation_deg: 0.0,
        }
    }
}

impl RenderConfig {
    /// Unit vector towards the light in camera coordinates (x right, y up, z towards the viewer).
    pub fn light_direction_camera(&self) -> [f64; 3] {
        let (az, el) = (self.light_azimuth_deg.to_radians(), self.light_elevation_deg.to_radians());
        [az.sin() * el.cos(), el.sin(), az.cos() * el.cos()]
    }

    pub fn validate(&self) -> Result<(), RenderError> {
        let bad = |m: &str| Err(RenderError::InvalidConfig(m.to_owned()));
        if self.width == 0 || self.height == 0 {
            return bad("image size must be positive");
        }
        if !(self.fov_deg > 0.0 && self.fov_deg < 180.0) {
            return bad("fov must lie in (0, 180) degrees");
        }
        if !(0.0..=1.0).contains(&self.ambient) {
            return bad("ambient must lie in [0, 1]");
        }
        if !(self.light_intensity >= 0.0 && self.light_intensity.is_finite()) {
            return bad("light intensity must be finite and nonnegative");
        }
        let (g, m) = self.material.parameters();
        if !(0.0..=1.0).contains(&g) || !(0.0..=1.0).contains(&m) {
            return bad("glossiness and metalness must lie in [0, 1]");
        }
        Ok(())
    }

    /// Parses `key = value` lines; `#` starts a comment and unknown keys are errors.
    ///
    /// Keys: `width`, `height`, `fov`, `light_azimuth`, `light_elevation`, `light_intensity`,
    /// `ambient`, `material` (`lambertian`, `glossy`, `metallic`), `glossiness`, `metalness`,
    /// `background`, `mipmap` (`on`/`off`), `albedo` (`texture`/`white`), `lit` (`on`/`off`),
    /// `main_azimuth`, `main_elevation`. `glossiness` and `metalness` override the preset values.
    pub fn parse(text: &str) -> Result<Self, RenderError> {
        let mut cfg = RenderConfig::default();
        let mut glossiness = None;
        let mut metalness = None;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |m: &str| RenderError::InvalidConfig(format!("line {}: {m}", i + 1));
            let (key, value) = line.split_once('=').ok_or_else(|| err("expected key = value"))?;
            let (key, value) = (key.trim(), value.trim());
            let num = || value.parse::<f64>().map_err(|_| err("expected a number"));
            let flag = || match value {
                "on" | "true" | "1" | "yes" => Ok(true),
                "off" | "false" | "0" | "no" => Ok(false),
                _ => Err(err("expected on or off")),
            };
            match key {
                "width" => cfg.width = value.parse().map_err(|_| err("expected an integer"))?,
                "height" => cfg.height = value.parse().map_err(|_| err("expected an integer"))?,
                "fov" => cfg.fov_deg = num()?,
                "light_azimuth" => cfg.light_azimuth_deg = num()?,
                "light_elevation" => cfg.light_elevation_deg = num()?,
                "light_intensity" => cfg.light_intensity = num()?,
                "ambient" => cfg.ambient = num()?,
                "material" => cfg.material = Material::preset(value).ok_or_else(|| err("unknown material"))?,
                "glossiness" => glossiness = Some(num()?),
                "metalness" => metalness = Some(num()?),
                "background" => cfg.background = value.parse().map_err(|_| err("expected 0..255"))?,
                "mipmap" => cfg.mipmap = flag()?,
                "albedo" => {
                    cfg.albedo = match value {
                        "texture" => Albedo::Texture,
                        "white" => Albedo::White,
                        _ => return Err(err("expected texture or white")),
                    }
                }
                "lit" => cfg.lit = flag()?,
                "main_azimuth" => cfg.main_azimuth_deg = num()?,
                "main_elevation" => cfg.main_elevation_deg = num()?,
                _ => return Err(err(&format!("unknown key `{key}`"))),
            }
        }
        cfg.material = match cfg.material {
            Material::Lambertian if glossiness.is_some() || metalness.is_some() => {
                return Err(RenderError::InvalidConfig(
                    "glossiness/metalness need a glossy or metallic material".into(),
                ))
            }
            Material::Lambertian => Material::Lambertian,
            Material::Glossy { glossiness: g } => Material::Glossy {
                glossiness: glossiness.unwrap_or(g),
            },
            Material::Metallic { glossiness: g, metalness: m } => Material::Metallic {
                glossiness: glossiness.unwrap_or(g),
                metalness: metalness.unwrap_or(m),
            },
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let onoff = |b: bool| if b { "on" } else { "off" };
        let _ = writeln!(s, "width = {}", self.width);
        let _ = writeln!(s, "height = {}", self.height);
        let _ = writeln!(s, "fov = {}", self.fov_deg);
        let _ = writeln!(s, "light_azimuth = {}", self.light_azimuth_deg);
        let _ = writeln!(s, "light_elevation = {}", self.light_elevation_deg);
        let _ = writeln!(s, "light_intensity = {}", self.light_intensity);
        let _ = writeln!(s, "ambient = {}", self.ambient);
        let _ = writeln!(s, "material = {}", self.material.name());
        let (g, m) = self.material.parameters();
        match self.material {
            Material::Lambertian => {}
            Material::Glossy { .. } => {
                let _ = writeln!(s, "glossiness = {g}");
            }
            Material::Metallic { .. } => {
                let _ = writeln!(s, "glossiness = {g}");
                let _ = writeln!(s, "metalness = {m}");
            }
        }
        let _ = writeln!(s, "background = {}", self.background);
        let _ = writeln!(s, "mipmap = {}", onoff(self.mipmap));
        let albedo = match self.albedo {
            Albedo::Texture => "texture",
            Albedo::White => "white",
        };
        let _ = writeln!(s, "albedo = {albedo}");
        let _ = writeln!(s, "lit = {}", onoff(self.lit));
        let _ = writeln!(s, "main_azimuth = {}", self.main_azimuth_deg);
        let _ = writeln!(s, "main_elevation = {}", self.main_elevation_deg);
        s
    }
}
