//! Release tailoring and SOC scaffolding.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::dualsync::derive_file;
use crate::error::{Error, Result};
use crate::model::{compile_glob, Axis, Manifest, RuleDoc, TagAxes, Visibility};
use crate::patch::{diff_file, Patch};
use crate::smartval::TraceGraph;
use crate::tree::{SourceTree, MANIFEST_FILE};

/// Upper bound on paths a new SOC may touch.
pub const SCAFFOLD_IMPACT_BOUND: usize = 5;

/// Empty axis sets mean "everything" for that axis.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReleaseConfig {
    #[serde(default)]
    pub os: BTreeSet<String>,
    #[serde(default)]
    pub socs: BTreeSet<String>,
    #[serde(default)]
    pub ips: BTreeSet<String>,
    #[serde(default)]
    pub features: BTreeSet<String>,
    #[serde(default)]
    pub usages: BTreeSet<String>,
    #[serde(default)]
    pub include_internal: bool,
}

impl ReleaseConfig {
    pub fn axis(&self, axis: Axis) -> &BTreeSet<String> {
        match axis {
            Axis::Os => &self.os,
            Axis::Soc => &self.socs,
            Axis::Ip => &self.ips,
            Axis::Feature => &self.features,
            Axis::Usage => &self.usages,
        }
    }

    pub fn from_json(text: &str) -> Result<ReleaseConfig> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self, manifest: &Manifest) -> Result<()> {
        for axis in Axis::ALL {
            let vocab = manifest.vocabulary(axis);
            for id in self.axis(axis) {
                if !vocab.iter().any(|v| v == id) {
                    return Err(Error::Config(format!("unknown {} `{id}`", axis.name())));
                }
            }
        }
        Ok(())
    }

    /// A file is compatible when, on every axis, either side is unrestricted
    /// or the two sets intersect.
    pub fn accepts(&self, tags: &TagAxes) -> bool {
        Axis::ALL.iter().all(|&axis| {
            let want = self.axis(axis);
            let have = tags.axis(axis);
            want.is_empty() || have.is_empty() || !want.is_disjoint(have)
        })
    }
}

pub fn tailor_tree(tree: &SourceTree, manifest: &Manifest, config: &ReleaseConfig) -> Result<SourceTree> {
    config.validate(manifest)?;
    let mut out = SourceTree::new();
    for (path, content) in tree.iter() {
        if !config.accepts(&manifest.tags_of(path)) {
            continue;
        }
        if config.include_internal {
            out.insert(path, content)?;
        } else if let Some((text, _)) = derive_file(manifest, path, content)? {
            out.insert(path, &text)?;
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// SOC scaffolding

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CreatedFile {
    pub path: String,
    pub content: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EditedFile {
    pub path: String,
    pub patch: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ScaffoldPlan {
    pub soc_id: String,
    pub family: String,
    pub creates: Vec<CreatedFile>,
    pub edits: Vec<EditedFile>,
    pub impact_count: usize,
    /// Manifest document after the edit.
    #[serde(skip)]
    pub manifest_after: String,
}

impl ScaffoldPlan {
    pub fn touched_paths(&self) -> BTreeSet<String> {
        self.creates
            .iter()
            .map(|c| c.path.clone())
            .chain(self.edits.iter().map(|e| e.path.clone()))
            .collect()
    }

    fn count_impact(&self) -> usize {
        let edits: BTreeSet<&str> = self.edits.iter().map(|e| e.path.as_str()).collect();
        self.creates.len() + edits.len()
    }
}

fn soc_dir(soc: &str) -> String {
    format!("soc/{soc}")
}

fn templates(soc: &str, family: &str) -> [(String, String); 3] {
    let dir = soc_dir(soc);
    let upper = soc.to_uppercase();
    [
        (
            format!("{dir}/init.c"),
            format!(
                "// SOC {soc}: initialization, derived from the {family} family.\n\
                 #include \"soc/{family}/init.h\"\n\
                 \n\
                 int soc_{soc}_init(struct soc_ctx *ctx)\n\
                 {{\n\
                 \x20   return soc_{family}_init_common(ctx, SOC_ID_{upper});\n\
                 }}\n"
            ),
        ),
        (
            format!("{dir}/caps.c"),
            format!(
                "// SOC {soc}: capability table. Entries not listed inherit from {family}.\n\
                 #include \"soc/{family}/caps.h\"\n\
                 \n\
                 const struct soc_caps soc_{soc}_caps = {{\n\
                 \x20   .base = &soc_{family}_caps,\n\
                 }};\n"
            ),
        ),
        (
            format!("{dir}/regs.c"),
            format!(
                "// SOC {soc}: register overrides on top of the {family} IP set.\n\
                 #include \"soc/{family}/regs.h\"\n\
                 \n\
                 const struct reg_override soc_{soc}_regs[] = {{\n\
                 \x20   {{ 0, 0 }},\n\
                 }};\n"
            ),
        ),
    ]
}

fn check_soc_id(id: &str) -> Result<()> {
    let ok = !id.is_empty() && id.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-');
    if ok {
        Ok(())
    } else {
        Err(Error::Config(format!("invalid soc id `{id}`")))
    }
}

/// Plans a new SOC as three isolated files plus one manifest edit that
/// registers the id and a `soc/<id>/**` rule ahead of all others.
pub fn scaffold_soc(manifest: &Manifest, soc_id: &str, family: &str) -> Result<ScaffoldPlan> {
    check_soc_id(soc_id)?;
    let socs = manifest.vocabulary(Axis::Soc);
    if socs.iter().any(|s| s == soc_id) {
        return Err(Error::DuplicateSoc(soc_id.to_owned()));
    }
    if !socs.iter().any(|s| s == family) {
        return Err(Error::UnknownFamily(family.to_owned()));
    }

    let pattern = format!("{}/**", soc_dir(soc_id));
    let mut doc = manifest.doc().clone();
    doc.axes.get_mut(Axis::Soc).push(soc_id.to_owned());
    let mut rule = RuleDoc::new(pattern.clone(), Visibility::Internal);
    rule.soc.push(soc_id.to_owned());
    doc.rules.insert(0, rule);
    let manifest_after = doc.to_json();

    let edit = diff_file(MANIFEST_FILE, Some(manifest.source()), Some(&manifest_after))
        .expect("registering a soc changes the manifest");
    let matcher = compile_glob(&pattern)?;
    let creates: Vec<CreatedFile> = templates(soc_id, family)
        .into_iter()
        .map(|(path, content)| {
            debug_assert!(matcher.is_match(&path));
            CreatedFile { path, content }
        })
        .collect();

    let mut plan = ScaffoldPlan {
        soc_id: soc_id.to_owned(),
        family: family.to_owned(),
        creates,
        edits: vec![EditedFile { path: MANIFEST_FILE.to_owned(), patch: Patch { files: vec![edit] }.to_string() }],
        impact_count: 0,
        manifest_after,
    };
    plan.impact_count = plan.count_impact();
    assert!(plan.impact_count <= SCAFFOLD_IMPACT_BOUND, "scaffold touches {} paths", plan.impact_count);
    Ok(plan)
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ImpactReport {
    pub touched_paths: BTreeSet<String>,
    pub impacted_features: BTreeSet<String>,
    pub impacted_tests: BTreeSet<String>,
    /// Impacted features that also serve another SOC (its own files or
    /// SOC-untagged common code).
    pub cross_soc_overlap: BTreeSet<String>,
}

impl ImpactReport {
    pub fn is_isolated(&self) -> bool {
        self.cross_soc_overlap.is_empty()
    }
}

pub fn impact_report(plan: &ScaffoldPlan, graph: &TraceGraph, manifest: &Manifest) -> ImpactReport {
    let touched = plan.touched_paths();
    let impacted_features: BTreeSet<String> = touched.iter().flat_map(|p| graph.features_of(p)).collect();
    let impacted_tests = impacted_features.iter().flat_map(|f| graph.tests_of(f)).cloned().collect();

    let mut other_soc_features = BTreeSet::new();
    for (path, features) in &graph.file_to_features {
        let socs = manifest.tags_of(path).soc;
        if socs.is_empty() || socs.iter().any(|s| *s != plan.soc_id) {
            other_soc_features.extend(features.iter().cloned());
        }
    }
    let cross_soc_overlap = impacted_features.intersection(&other_soc_features).cloned().collect();
    ImpactReport { touched_paths: touched, impacted_features, impacted_tests, cross_soc_overlap }
}
