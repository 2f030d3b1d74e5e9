//! Key-value configuration files for materials, layer stacks, electrode
//! circuits, patch scenes and model parameters.
//!
//! Syntax: `[section]` headers, `key = value` lines, `#` starts a comment.
//! Sections and keys may repeat and keep their order. Lists are comma
//! separated. Keys before the first header belong to an unnamed section.

use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::inference::{SurfaceModel, SynthGrid, SynthModel, TempFitParams};
use crate::layered_media::{Layer, LayerStack};
use crate::materials::{FilmSheet, MaterialModel, ResistivityTable, ScSheetResistance, TwoFluid};
use crate::noise_models::{ElectrodeModel, FilterCapacitor, FilterNetwork, LeadModel, PcbTrace, WireBond};
use crate::patch_field::{IonPose, PatchScene, PlaneRegion, Rect};

const DEFAULT_MATERIALS: &str = include_str!("../../../materials/default.cfg");

#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub key: String,
    pub value: String,
    pub line: usize,
    /// 1-based column where the value starts.
    pub column: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Section {
    pub name: String,
    pub line: usize,
    pub entries: Vec<Entry>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Document {
    /// Name used in error messages.
    pub source: String,
    pub sections: Vec<Section>,
}

impl Document {
    pub fn parse(source: &str, text: &str) -> Result<Self> {
        let mut sections = vec![Section { name: String::new(), line: 0, entries: vec![] }];
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("");
            let trimmed = content.trim();
            if trimmed.is_empty() {
                continue;
            }
            let indent = content.len() - content.trim_start().len();
            if let Some(rest) = trimmed.strip_prefix('[') {
                let Some(name) = rest.strip_suffix(']') else {
                    return Err(Error::config(source, line, indent + 1, "unterminated section header"));
                };
                let name = name.trim();
                if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') {
                    return Err(Error::config(source, line, indent + 2, format!("invalid section name `{name}`")));
                }
                sections.push(Section { name: name.to_string(), line, entries: vec![] });
                continue;
            }
            let Some(eq) = content.find('=') else {
                return Err(Error::config(source, line, indent + 1, "expected `key = value` or `[section]`"));
            };
            let key = content[..eq].trim();
            if key.is_empty() || !key.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
                return Err(Error::config(source, line, indent + 1, format!("invalid key `{key}`")));
            }
            let after = &content[eq + 1..];
            let value = after.trim();
            if value.is_empty() {
                return Err(Error::config(source, line, eq + 2, format!("missing value for `{key}`")));
            }
            let column = eq + 2 + (after.len() - after.trim_start().len());
            sections.last_mut().expect("root section").entries.push(Entry {
                key: key.to_string(),
                value: value.to_string(),
                line,
                column,
            });
        }
        Ok(Self { source: source.to_string(), sections })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config(&path.display().to_string(), 0, 0, format!("cannot read file: {e}")))?;
        Self::parse(&path.display().to_string(), &text)
    }

    /// Sections called `name`, wrapped for typed access.
    pub fn sections<'a>(&'a self, name: &'a str) -> impl Iterator<Item = SectionView<'a>> + 'a {
        self.sections.iter().filter(move |s| s.name == name).map(move |s| SectionView { doc: self, section: s })
    }

    /// Fail on sections not in `known` (the unnamed section is allowed if it is empty).
    pub fn expect_sections(&self, known: &[&str]) -> Result<()> {
        for s in &self.sections {
            if s.name.is_empty() {
                if let Some(e) = s.entries.first() {
                    return Err(self.err(e.line, 1, format!("`{}` appears before any section header", e.key)));
                }
            } else if !known.contains(&s.name.as_str()) {
                return Err(self.err(s.line, 2, format!("unknown section `[{}]`", s.name)));
            }
        }
        Ok(())
    }

    /// At most one section called `name`.
    pub fn single(&self, name: &str) -> Result<Option<SectionView<'_>>> {
        let mut it = self.sections.iter().filter(|s| s.name == name);
        let first = it.next();
        if let Some(dup) = it.next() {
            return Err(self.err(dup.line, 2, format!("section `[{name}]` may appear only once")));
        }
        Ok(first.map(|s| SectionView { doc: self, section: s }))
    }

    fn err(&self, line: usize, column: usize, msg: impl Into<String>) -> Error {
        Error::config(&self.source, line, column, msg)
    }
}

#[derive(Clone, Copy)]
pub struct SectionView<'a> {
    doc: &'a Document,
    pub section: &'a Section,
}

impl<'a> SectionView<'a> {
    pub fn err(&self, entry: Option<&Entry>, msg: impl Into<String>) -> Error {
        match entry {
            Some(e) => self.doc.err(e.line, e.column, msg),
            None => self.doc.err(self.section.line, 1, format!("[{}]: {}", self.section.name, msg.into())),
        }
    }

    pub fn expect_keys(&self, known: &[&str]) -> Result<()> {
        for e in &self.section.entries {
            if !known.contains(&e.key.as_str()) {
                return Err(self.doc.err(e.line, 1, format!("unknown key `{}` in [{}]", e.key, self.section.name)));
            }
        }
        Ok(())
    }

    pub fn all(&self, key: &'a str) -> impl Iterator<Item = &'a Entry> + 'a {
        self.section.entries.iter().filter(move |e| e.key == key)
    }

    pub fn get(&self, key: &str) -> Result<Option<&'a Entry>> {
        let mut it = self.section.entries.iter().filter(|e| e.key == key);
        let first = it.next();
        if let Some(dup) = it.next() {
            return Err(self.doc.err(dup.line, 1, format!("key `{key}` given more than once")));
        }
        Ok(first)
    }

    pub fn required(&self, key: &str) -> Result<&'a Entry> {
        self.get(key)?.ok_or_else(|| self.err(None, format!("missing key `{key}`")))
    }

    pub fn str(&self, key: &str) -> Result<&'a str> {
        Ok(self.required(key)?.value.as_str())
    }

    pub fn f64(&self, key: &str) -> Result<f64> {
        self.parse_f64(self.required(key)?)
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64> {
        match self.get(key)? {
            Some(e) => self.parse_f64(e),
            None => Ok(default),
        }
    }

    pub fn opt_f64(&self, key: &str) -> Result<Option<f64>> {
        self.get(key)?.map(|e| self.parse_f64(e)).transpose()
    }

    pub fn bool_or(&self, key: &str, default: bool) -> Result<bool> {
        match self.get(key)? {
            None => Ok(default),
            Some(e) => match e.value.as_str() {
                "true" | "yes" => Ok(true),
                "false" | "no" => Ok(false),
                other => Err(self.err(Some(e), format!("expected true or false, got `{other}`"))),
            },
        }
    }

    pub fn parse_f64(&self, e: &Entry) -> Result<f64> {
        let v: f64 = e.value.parse().map_err(|_| self.err(Some(e), format!("`{}` is not a number", e.value)))?;
        if !v.is_finite() {
            return Err(self.err(Some(e), "value must be finite"));
        }
        Ok(v)
    }

    /// Comma-separated numbers of an entry, with the column of each item in errors.
    pub fn list(&self, e: &Entry) -> Result<Vec<f64>> {
        let mut out = Vec::new();
        let mut offset = 0;
        for item in e.value.split(',') {
            let lead = item.len() - item.trim_start().len();
            let text = item.trim();
            let v: f64 = text
                .parse()
                .map_err(|_| self.doc.err(e.line, e.column + offset + lead, format!("`{text}` is not a number")))?;
            if !v.is_finite() {
                return Err(self.doc.err(e.line, e.column + offset + lead, "value must be finite"));
            }
            out.push(v);
            offset += item.len() + 1;
        }
        Ok(out)
    }

    pub fn list_of(&self, key: &str, len: usize) -> Result<Vec<f64>> {
        let e = self.required(key)?;
        let v = self.list(e)?;
        if v.len() != len {
            return Err(self.err(Some(e), format!("`{key}` needs {len} values, got {}", v.len())));
        }
        Ok(v)
    }

    /// Splits `name, number` pairs such as `film = Au, 200e-9`.
    fn name_and_number(&self, e: &Entry) -> Result<(String, f64)> {
        let Some((name, num)) = e.value.split_once(',') else {
            return Err(self.err(Some(e), "expected `name, value`"));
        };
        let v: f64 = num.trim().parse().map_err(|_| {
            self.doc.err(e.line, e.column + name.len() + 1, format!("`{}` is not a number", num.trim()))
        })?;
        Ok((name.trim().to_string(), v))
    }

    fn check<T>(&self, e: Option<&Entry>, r: Result<T>) -> Result<T> {
        r.map_err(|err| self.err(e, err.to_string()))
    }
}

/// Resolve `relative` against the directory of `base`.
fn resolve(base: &Path, relative: &str) -> PathBuf {
    base.parent().unwrap_or(Path::new(".")).join(relative)
}

// ---------------------------------------------------------------- materials

#[derive(Debug, Clone, PartialEq)]
pub struct MaterialLibrary {
    materials: Vec<(String, MaterialModel)>,
}

impl MaterialLibrary {
    /// The library shipped in `materials/default.cfg`.
    pub fn builtin() -> Self {
        Self::parse("materials/default.cfg", DEFAULT_MATERIALS).expect("shipped materials file")
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_document(&Document::load(path)?)
    }

    pub fn parse(source: &str, text: &str) -> Result<Self> {
        Self::from_document(&Document::parse(source, text)?)
    }

    fn from_document(doc: &Document) -> Result<Self> {
        doc.expect_sections(&["material"])?;
        let mut materials: Vec<(String, MaterialModel)> = Vec::new();
        for s in doc.sections("material") {
            let name_entry = s.required("name")?;
            let name = name_entry.value.clone();
            if materials.iter().any(|(n, _)| *n == name) {
                return Err(s.err(Some(name_entry), format!("material `{name}` defined twice")));
            }
            let kind = s.required("kind")?;
            let model = match kind.value.as_str() {
                "vacuum" => {
                    s.expect_keys(&["name", "kind"])?;
                    MaterialModel::Vacuum
                }
                "conductor" => {
                    s.expect_keys(&["name", "kind", "rho"])?;
                    MaterialModel::Conductor {
                        rho: rho_table(&s, &name)?.ok_or_else(|| s.err(None, "conductor needs `rho` rows"))?,
                    }
                }
                "dielectric" => {
                    s.expect_keys(&["name", "kind", "eps_r", "tan_delta"])?;
                    MaterialModel::LossyDielectric { eps_r: s.f64("eps_r")?, tan_delta: s.f64_or("tan_delta", 0.0)? }
                }
                "two_fluid" => {
                    s.expect_keys(&[
                        "name",
                        "kind",
                        "lambda0",
                        "tc",
                        "tc_uncertainty",
                        "sigma_n",
                        "rho",
                        "rho_linear_t_max",
                        "sc_sheet_r",
                        "sc_sheet_f_ref_hz",
                        "sc_sheet_exponent",
                    ])?;
                    let tc = s.f64("tc")?;
                    let sigma_n = s.f64("sigma_n")?;
                    let rho_normal = match rho_table(&s, &name)? {
                        Some(t) => t,
                        None => s.check(
                            s.get("rho_linear_t_max")?,
                            ResistivityTable::linear_normal_state(
                                format!("{name} (normal)"),
                                1.0 / sigma_n,
                                tc,
                                s.f64_or("rho_linear_t_max", 400.0)?,
                            ),
                        )?,
                    };
                    let d = ScSheetResistance::YBCO_MHZ;
                    MaterialModel::TwoFluidSc(TwoFluid {
                        lambda0: s.f64("lambda0")?,
                        tc,
                        tc_uncertainty: s.f64_or("tc_uncertainty", 0.0)?,
                        sigma_n,
                        rho_normal,
                        sc_sheet: ScSheetResistance {
                            r_ref: s.f64_or("sc_sheet_r", d.r_ref)?,
                            f_ref_hz: s.f64_or("sc_sheet_f_ref_hz", d.f_ref_hz)?,
                            exponent: s.f64_or("sc_sheet_exponent", d.exponent)?,
                        },
                    })
                }
                other => {
                    return Err(s.err(
                        Some(kind),
                        format!("unknown material kind `{other}` (vacuum, conductor, dielectric, two_fluid)"),
                    ))
                }
            };
            s.check(Some(name_entry), model.validate())?;
            materials.push((name, model));
        }
        Ok(Self { materials })
    }

    pub fn get(&self, name: &str) -> Option<&MaterialModel> {
        self.materials.iter().find(|(n, _)| n == name).map(|(_, m)| m)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.materials.iter().map(|(n, _)| n.as_str())
    }

    fn lookup(&self, s: &SectionView, e: &Entry, name: &str) -> Result<MaterialModel> {
        self.get(name).cloned().ok_or_else(|| s.err(Some(e), format!("unknown material `{name}`")))
    }
}

fn rho_table(s: &SectionView, name: &str) -> Result<Option<ResistivityTable>> {
    let rows: Vec<&Entry> = s.all("rho").collect();
    if rows.is_empty() {
        return Ok(None);
    }
    let mut entries = Vec::with_capacity(rows.len());
    for e in &rows {
        let v = s.list(e)?;
        if v.len() != 2 {
            return Err(s.err(Some(e), "`rho` rows are `temperature, resistivity`"));
        }
        entries.push((v[0], v[1]));
    }
    s.check(rows.first().copied(), ResistivityTable::new(name, entries)).map(Some)
}

/// `materials = path` in `section`, relative to the file; the shipped
/// library when absent.
fn library_for(doc: &Document, path: &Path, section: &str) -> Result<MaterialLibrary> {
    if let Some(s) = doc.single(section)? {
        if let Some(e) = s.get("materials")? {
            return MaterialLibrary::load(&resolve(path, &e.value));
        }
    }
    Ok(MaterialLibrary::builtin())
}

// ---------------------------------------------------------------- stacks

/// Layers top to bottom; `thickness = bulk` marks the semi-infinite substrate.
pub fn parse_stack(doc: &Document, lib: &MaterialLibrary) -> Result<LayerStack> {
    doc.expect_sections(&["stack", "layer"])?;
    if let Some(s) = doc.single("stack")? {
        s.expect_keys(&["materials", "name"])?;
    }
    let mut layers = Vec::new();
    let mut last = None;
    for s in doc.sections("layer") {
        s.expect_keys(&["material", "thickness"])?;
        let m = s.required("material")?;
        let material = lib.lookup(&s, m, &m.value)?;
        let t = s.required("thickness")?;
        layers.push(if t.value == "bulk" {
            Layer::bulk(material)
        } else {
            let v = s.parse_f64(t)?;
            if !(v > 0.0) {
                return Err(s.err(Some(t), "thickness must be positive or `bulk`"));
            }
            Layer::finite(material, v)
        });
        last = Some(s);
    }
    let Some(last) = last else {
        return Err(doc.err(0, 0, "stack has no [layer] sections"));
    };
    last.check(None, LayerStack::new(layers))
}

pub fn load_stack(path: &Path) -> Result<LayerStack> {
    let doc = Document::load(path)?;
    parse_stack(&doc, &library_for(&doc, path, "stack")?)
}

// ---------------------------------------------------------------- circuits

/// Electrodes with their named filter and lead definitions.
pub fn parse_circuit(doc: &Document, lib: &MaterialLibrary) -> Result<Vec<ElectrodeModel>> {
    doc.expect_sections(&["circuit", "filter", "lead", "electrode"])?;
    if let Some(s) = doc.single("circuit")? {
        s.expect_keys(&["materials", "name"])?;
    }
    let conductor_table = |s: &SectionView, key: &str| -> Result<ResistivityTable> {
        let e = s.required(key)?;
        match lib.lookup(s, e, &e.value)? {
            MaterialModel::Conductor { rho } => Ok(rho),
            _ => Err(s.err(Some(e), format!("`{}` is not a normal conductor", e.value))),
        }
    };

    let mut filters: Vec<(String, FilterNetwork)> = Vec::new();
    for s in doc.sections("filter") {
        s.expect_keys(&["name", "series_r", "capacitor"])?;
        let mut caps = Vec::new();
        for e in s.all("capacitor") {
            let v = s.list(e)?;
            if v.len() != 2 {
                return Err(s.err(Some(e), "`capacitor` is `capacitance, esr`"));
            }
            caps.push(FilterCapacitor { capacitance: v[0], esr: v[1] });
        }
        let net = s.check(None, FilterNetwork::new(s.f64("series_r")?, caps))?;
        filters.push((s.str("name")?.to_string(), net));
    }

    let mut leads: Vec<(String, LeadModel)> = Vec::new();
    for s in doc.sections("lead") {
        s.expect_keys(&[
            "name",
            "trace_width",
            "trace_thickness",
            "trace_length",
            "trace_material",
            "bond_diameter",
            "bond_length",
            "bond_material",
            "bonds",
            "contact_r",
        ])?;
        let bonds = s.f64_or("bonds", 1.0)?;
        if !(bonds >= 1.0 && bonds.fract() == 0.0 && bonds <= f64::from(u32::MAX)) {
            return Err(s.err(s.get("bonds")?, "`bonds` must be a positive integer"));
        }
        let lead = LeadModel {
            pcb_trace: PcbTrace {
                width: s.f64("trace_width")?,
                thickness: s.f64("trace_thickness")?,
                length: s.f64("trace_length")?,
                material: conductor_table(&s, "trace_material")?,
            },
            wire_bond: WireBond {
                diameter: s.f64("bond_diameter")?,
                length: s.f64("bond_length")?,
                material: conductor_table(&s, "bond_material")?,
                multiplicity: bonds as u32,
            },
            contact_r_per_bond: s.f64_or("contact_r", 0.0)?,
        };
        s.check(None, lead.validate())?;
        leads.push((s.str("name")?.to_string(), lead));
    }

    let mut electrodes = Vec::new();
    for s in doc.sections("electrode") {
        s.expect_keys(&["name", "distance", "length", "width", "film", "lead", "filter", "approximate"])?;
        let mut films = Vec::new();
        for e in s.all("film") {
            let (name, t) = s.name_and_number(e)?;
            let material = lib.lookup(&s, e, &name)?;
            films.push(s.check(Some(e), FilmSheet::new(material, t))?);
        }
        let reference = |key: &str| -> Result<Option<&Entry>> { s.get(key) };
        let lead = match reference("lead")? {
            None => None,
            Some(e) => Some(
                leads
                    .iter()
                    .find(|(n, _)| *n == e.value)
                    .map(|(_, l)| l.clone())
                    .ok_or_else(|| s.err(Some(e), format!("no [lead] named `{}`", e.value)))?,
            ),
        };
        let filter = match reference("filter")? {
            None => None,
            Some(e) => Some(
                filters
                    .iter()
                    .find(|(n, _)| *n == e.value)
                    .map(|(_, f)| f.clone())
                    .ok_or_else(|| s.err(Some(e), format!("no [filter] named `{}`", e.value)))?,
            ),
        };
        let electrode = ElectrodeModel {
            name: s.str("name")?.to_string(),
            characteristic_distance: s.f64("distance")?,
            strip_length: s.f64_or("length", 1.0)?,
            strip_width: s.f64_or("width", 1.0)?,
            films,
            lead,
            filter,
            approximate: s.bool_or("approximate", false)?,
        };
        s.check(None, electrode.validate())?;
        electrodes.push(electrode);
    }
    Ok(electrodes)
}

pub fn load_circuit(path: &Path) -> Result<Vec<ElectrodeModel>> {
    let doc = Document::load(path)?;
    parse_circuit(&doc, &library_for(&doc, path, "circuit")?)
}

// ---------------------------------------------------------------- scenes

pub fn parse_scene(doc: &Document) -> Result<PatchScene> {
    doc.expect_sections(&["scene", "ion", "region"])?;
    let scene = doc.single("scene")?.ok_or_else(|| doc.err(0, 0, "missing [scene] section"))?;
    scene.expect_keys(&["target"])?;
    let ion = doc.single("ion")?.ok_or_else(|| doc.err(0, 0, "missing [ion] section"))?;
    ion.expect_keys(&["position", "height", "axial"])?;
    let pos = ion.list_of("position", 2)?;
    let axial = ion.list_of("axial", 2)?;
    let pose = ion.check(None, IonPose::new([pos[0], pos[1]], ion.f64("height")?, [axial[0], axial[1]]))?;
    let mut regions = Vec::new();
    for s in doc.sections("region") {
        s.expect_keys(&["label", "rect", "weight"])?;
        let r = s.list_of("rect", 4)?;
        regions.push(PlaneRegion {
            label: s.str("label")?.to_string(),
            rect: s.check(s.get("rect")?, Rect::new(r[0], r[1], r[2], r[3]))?,
            weight: s.f64_or("weight", 1.0)?,
        });
    }
    scene.check(None, PatchScene::new(regions, pose, scene.str("target")?))
}

pub fn load_scene(path: &Path) -> Result<PatchScene> {
    parse_scene(&Document::load(path)?)
}

// ---------------------------------------------------------------- model parameters

/// A generating model with an optional measurement grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub model: SynthModel,
    pub grid: Option<SynthGrid>,
}

pub fn parse_params(doc: &Document) -> Result<ModelParams> {
    doc.expect_sections(&["temperature_model", "surface_model", "grid"])?;
    let temp = doc.single("temperature_model")?;
    let surf = doc.single("surface_model")?;
    let model = match (temp, surf) {
        (Some(s), None) => {
            s.expect_keys(&["model", "gamma0", "t1", "beta1", "t2", "beta2", "t_star"])?;
            let mut frequencies_hz = Vec::new();
            let mut gamma0 = Vec::new();
            for e in s.all("gamma0") {
                let v = s.list(e)?;
                if v.len() != 2 {
                    return Err(s.err(Some(e), "`gamma0` rows are `frequency_hz, rate`"));
                }
                frequencies_hz.push(v[0]);
                gamma0.push(v[1]);
            }
            if gamma0.is_empty() {
                return Err(s.err(None, "need at least one `gamma0` row"));
            }
            let kind = s.required("model")?;
            let piecewise = match kind.value.as_str() {
                "simple" => false,
                "piecewise" => true,
                other => return Err(s.err(Some(kind), format!("unknown model `{other}` (simple, piecewise)"))),
            };
            let (t2, beta2, t_star) = if piecewise {
                (Some(s.f64("t2")?), Some(s.f64("beta2")?), Some(s.f64("t_star")?))
            } else {
                (None, None, None)
            };
            let p =
                TempFitParams { frequencies_hz, gamma0, t1: s.f64("t1")?, beta1: s.f64("beta1")?, t2, beta2, t_star };
            if !(p.t1 > 0.0) || [p.t2, p.t_star].iter().flatten().any(|v| !(*v > 0.0)) {
                return Err(s.err(None, "T1, T2 and T* must be positive"));
            }
            if piecewise {
                SynthModel::Piecewise(p)
            } else {
                SynthModel::Simple(p)
            }
        }
        (None, Some(s)) => {
            let kind = s.required("model")?;
            SynthModel::Surface(match kind.value.as_str() {
                "power_law" => {
                    s.expect_keys(&["model", "s_e0", "beta", "t0"])?;
                    SurfaceModel::PowerLaw { s_e0: s.f64("s_e0")?, beta: s.f64("beta")?, t0: s.f64("t0")? }
                }
                "arrhenius" => {
                    s.expect_keys(&["model", "s_e0", "s_et", "t0"])?;
                    SurfaceModel::Arrhenius { s_e0: s.f64("s_e0")?, s_et: s.f64("s_et")?, t0: s.f64("t0")? }
                }
                other => return Err(s.err(Some(kind), format!("unknown model `{other}` (power_law, arrhenius)"))),
            })
        }
        (Some(_), Some(s)) => return Err(s.err(None, "give either [temperature_model] or [surface_model], not both")),
        (None, None) => return Err(doc.err(0, 0, "missing [temperature_model] or [surface_model]")),
    };
    let grid = match doc.single("grid")? {
        None => None,
        Some(s) => {
            s.expect_keys(&["temperatures", "frequencies_hz"])?;
            let temperatures = s.list(s.required("temperatures")?)?;
            let frequencies_hz = match s.get("frequencies_hz")? {
                Some(e) => s.list(e)?,
                None => match &model {
                    SynthModel::Simple(p) | SynthModel::Piecewise(p) => p.frequencies_hz.clone(),
                    SynthModel::Surface(_) => vec![1.0e6],
                },
            };
            Some(SynthGrid { temperatures, frequencies_hz })
        }
    };
    Ok(ModelParams { model, grid })
}

pub fn load_params(path: &Path) -> Result<ModelParams> {
    parse_params(&Document::load(path)?)
}
