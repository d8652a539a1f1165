use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{AnnotationKind, Storyboard, StoryboardError, StoryboardPanel};
use crate::journey::{HarmTaxonomy, JourneyStory};
use crate::persona::{EntryKind, Persona, Rated};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Structured,
    Markdown,
    Html,
}

impl FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "structured" | "json" => Ok(ReportFormat::Structured),
            "markdown" | "md" => Ok(ReportFormat::Markdown),
            "html" => Ok(ReportFormat::Html),
            other => Err(format!("unknown report format `{other}` (expected structured, markdown or html)")),
        }
    }
}

impl ReportFormat {
    pub fn extension(self) -> &'static str {
        match self {
            ReportFormat::Structured => "json",
            ReportFormat::Markdown => "md",
            ReportFormat::Html => "html",
        }
    }
}

/// The structured report.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub persona: Persona,
    pub story: JourneyStory,
    pub storyboard: Storyboard,
}

pub fn parse_structured_report(text: &str) -> Result<ReportDocument, StoryboardError> {
    let doc: ReportDocument = serde_json::from_str(text).map_err(|e| StoryboardError::MalformedReport(e.to_string()))?;
    check_consistent(&doc.storyboard, &doc.story, &doc.persona)?;
    Ok(doc)
}

fn check_consistent(board: &Storyboard, story: &JourneyStory, persona: &Persona) -> Result<(), StoryboardError> {
    if board.story_id != story.story_id {
        return Err(StoryboardError::InconsistentInputs(format!(
            "storyboard is for story `{}` but the story is `{}`",
            board.story_id, story.story_id
        )));
    }
    if story.persona_id != persona.persona_id {
        return Err(StoryboardError::InconsistentInputs(format!(
            "story is for persona `{}` but the persona is `{}`",
            story.persona_id, persona.persona_id
        )));
    }
    Ok(())
}

/// Render persona, identity, narrative, harms, then the annotated panels.
pub fn render_report(
    board: &Storyboard,
    story: &JourneyStory,
    persona: &Persona,
    format: ReportFormat,
) -> Result<String, StoryboardError> {
    check_consistent(board, story, persona)?;
    Ok(match format {
        ReportFormat::Structured => crate::docio::to_document(&ReportDocument {
            persona: persona.clone(),
            story: story.clone(),
            storyboard: board.clone(),
        }),
        ReportFormat::Markdown => markdown(board, story, persona),
        ReportFormat::Html => html(board, story, persona),
    })
}

fn harm_label(id: &str) -> &str {
    HarmTaxonomy::builtin_ref().get(id).map(|c| c.label.as_str()).unwrap_or(id)
}

fn rated(r: &Rated) -> String {
    let level = serde_json::to_value(r.level).ok().and_then(|v| v.as_str().map(str::to_string)).unwrap_or_default();
    format!("{level} ({})", r.justification)
}

fn entry_heading(kind: EntryKind) -> &'static str {
    match kind {
        EntryKind::Tension => "Tensions",
        EntryKind::Response => "Responses",
        EntryKind::Cost => "Costs",
    }
}

/// Panels grouped into consecutive runs of the same flow.
fn flow_groups(board: &Storyboard) -> Vec<&[StoryboardPanel]> {
    board
        .panels
        .chunk_by(|a, b| a.step_ref.function_id == b.step_ref.function_id && a.step_ref.flow_id == b.step_ref.flow_id)
        .collect()
}

fn markdown(board: &Storyboard, story: &JourneyStory, p: &Persona) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# Privacy journey: {} / {}\n", p.name, story.feature_id);

    let _ = writeln!(out, "## Persona\n");
    let _ = writeln!(out, "- **Name:** {}", p.name);
    let _ = writeln!(out, "- **Age:** {}", p.age);
    let _ = writeln!(out, "- **Demographics:** {}", p.demographics);
    let _ = writeln!(out, "- **Tech comfort:** {}", rated(&p.tech_comfort));
    let _ = writeln!(out, "- **Privacy awareness:** {}", rated(&p.privacy_awareness));
    let protected: Vec<&str> = p.protected_info.iter().map(String::as_str).collect();
    let _ = writeln!(out, "- **Protected information:** {}", protected.join(", "));
    for kind in EntryKind::ALL {
        let _ = writeln!(out, "\n### {}\n", entry_heading(kind));
        for e in p.entries(kind) {
            let _ = writeln!(out, "- {}", e.text);
        }
    }

    let _ = writeln!(out, "\n## Story\n");
    let _ = writeln!(out, "_{}_\n", story.identity.text);
    let _ = writeln!(out, "{}\n", story.narrative);
    let _ = writeln!(out, "**Motivations:** {}\n", story.motivations);
    let _ = writeln!(out, "**Sensitive information leaked:**\n");
    for leak in &story.sensitive_info_leaked {
        let _ = writeln!(out, "- {}: {}", leak.category, leak.description);
    }

    let _ = writeln!(out, "\n## Harms\n");
    for harm in &story.harms {
        let _ = writeln!(out, "- **{}**: {}", harm_label(&harm.category), harm.consequence);
    }

    let _ = writeln!(out, "\n## Flows");
    for group in flow_groups(board) {
        let first = &group[0];
        let _ = writeln!(out, "\n### {} ({})", first.flow_title, first.step_ref.function_id);
        for panel in group {
            let _ = writeln!(out, "\n#### Step {}\n", panel.step_ref.step);
            let _ = writeln!(out, "> Interface: {}", panel.wireframe.interface);
            if let Some(sys) = &panel.wireframe.system_action {
                let _ = writeln!(out, "> System: {sys}");
            }
            out.push('\n');
            for a in &panel.annotations {
                let _ = writeln!(out, "- [{} | {}] {}", a.kind.label(), a.color_role().as_str(), a.text);
            }
            if panel.leak_point {
                let _ = writeln!(out, "- [leak point | orange] Sensitive information leaks at this step.");
            }
        }
    }
    out
}

fn esc(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&#39;"),
            c => out.push(c),
        }
    }
    out
}

const STYLE: &str = "body{font-family:sans-serif;max-width:60rem;margin:2rem auto;line-height:1.4}\
.panel{border:1px solid #ccc;border-radius:6px;padding:.5rem 1rem;margin:.5rem 0}\
.wireframe{background:#f4f4f4;padding:.5rem;font-family:monospace}\
.blue{color:#1f5fbf}.orange{color:#c45a00}.annotation{list-style:square}";

fn html(board: &Storyboard, story: &JourneyStory, p: &Persona) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "<!DOCTYPE html>\n<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\">");
    let _ = writeln!(out, "<title>Privacy journey: {} / {}</title>", esc(&p.name), esc(&story.feature_id));
    let _ = writeln!(out, "<style>{STYLE}</style>\n</head>\n<body>");

    let _ = writeln!(out, "<section id=\"persona\">\n<h2>Persona</h2>\n<ul>");
    let _ = writeln!(out, "<li><b>Name:</b> {}</li>", esc(&p.name));
    let _ = writeln!(out, "<li><b>Age:</b> {}</li>", p.age);
    let _ = writeln!(out, "<li><b>Demographics:</b> {}</li>", esc(&p.demographics));
    let _ = writeln!(out, "<li><b>Tech comfort:</b> {}</li>", esc(&rated(&p.tech_comfort)));
    let _ = writeln!(out, "<li><b>Privacy awareness:</b> {}</li>", esc(&rated(&p.privacy_awareness)));
    let protected: Vec<String> = p.protected_info.iter().map(|c| esc(c)).collect();
    let _ = writeln!(out, "<li><b>Protected information:</b> {}</li>\n</ul>", protected.join(", "));
    for kind in EntryKind::ALL {
        let _ = writeln!(out, "<h3>{}</h3>\n<ul>", entry_heading(kind));
        for e in p.entries(kind) {
            let _ = writeln!(out, "<li>{}</li>", esc(&e.text));
        }
        let _ = writeln!(out, "</ul>");
    }
    let _ = writeln!(out, "</section>");

    let _ = writeln!(out, "<section id=\"story\">\n<h2>Story</h2>");
    let _ = writeln!(out, "<p class=\"identity\"><i>{}</i></p>", esc(&story.identity.text));
    let _ = writeln!(out, "<p class=\"narrative\">{}</p>", esc(&story.narrative));
    let _ = writeln!(out, "<p><b>Motivations:</b> {}</p>", esc(&story.motivations));
    let _ = writeln!(out, "<p><b>Sensitive information leaked:</b></p>\n<ul>");
    for leak in &story.sensitive_info_leaked {
        let _ = writeln!(out, "<li>{}: {}</li>", esc(&leak.category), esc(&leak.description));
    }
    let _ = writeln!(out, "</ul>\n</section>");

    let _ = writeln!(out, "<section id=\"harms\">\n<h2>Harms</h2>\n<ul>");
    for harm in &story.harms {
        let _ = writeln!(out, "<li><b>{}</b>: {}</li>", esc(harm_label(&harm.category)), esc(&harm.consequence));
    }
    let _ = writeln!(out, "</ul>\n</section>");

    let _ = writeln!(out, "<section id=\"flows\">\n<h2>Flows</h2>");
    for group in flow_groups(board) {
        let first = &group[0];
        let _ = writeln!(
            out,
            "<h3>{} ({})</h3>",
            esc(&first.flow_title),
            esc(&first.step_ref.function_id)
        );
        for panel in group {
            let _ = writeln!(out, "<div class=\"panel\" data-ref=\"{}\">", esc(&panel.step_ref.to_string()));
            let _ = writeln!(out, "<h4>Step {}</h4>", panel.step_ref.step);
            let _ = writeln!(out, "<div class=\"wireframe\">Interface: {}", esc(&panel.wireframe.interface));
            if let Some(sys) = &panel.wireframe.system_action {
                let _ = writeln!(out, "<br>System: {}", esc(sys));
            }
            let _ = writeln!(out, "</div>\n<ul>");
            for a in &panel.annotations {
                let kind = match a.kind {
                    AnnotationKind::UserAction => "user_action",
                    AnnotationKind::DesignFlaw => "design_flaw",
                };
                let color = a.color_role().as_str();
                let _ = writeln!(out, "<li class=\"annotation {kind} {color}\">{}</li>", esc(&a.text));
            }
            if panel.leak_point {
                let _ = writeln!(out, "<li class=\"leak_point orange\">Leak point: sensitive information leaks at this step.</li>");
            }
            let _ = writeln!(out, "</ul>\n</div>");
        }
    }
    let _ = writeln!(out, "</section>\n</body>\n</html>");
    out
}
