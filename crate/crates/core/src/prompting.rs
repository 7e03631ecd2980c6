//! Per-page prompt assembly and provider budget checks.

use std::path::Path;

use thiserror::Error;

use crate::ingest::PageText;
use crate::provider::ProviderProfile;

const SCHEMA_PLACEHOLDER: &str = "{SCHEMA}";
const RULES_PLACEHOLDER: &str = "{RULES}";
const PAGE_PLACEHOLDER: &str = "{PAGE_TEXT}";

/// Tokens held back from the input budget for framing the provider adds.
pub const RESERVED_OVERHEAD_TOKENS: u64 = 1_000;
/// Upper bound on output tokens needed per emitted record line.
pub const OUTPUT_TOKENS_PER_ROW: u64 = 20;

pub const DEFAULT_TEMPLATE_TEXT: &str = include_str!("../data/prompt_template.txt");

const SCHEMA_V1: &str = "\
Each record has four fields, in this order:
1. name: the club's name in its primary language, including the
   registered-association suffix (ry, rf)
2. alt_name: the same club's name in the other language, if the page gives
   one; otherwise empty
3. business_id: the club's Finnish Business ID (Y-tunnus); empty if absent
4. member_count: the total member count, digits only; empty if absent";

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PromptError {
    #[error("page {page_index} of `{file_stem}` is empty")]
    EmptyPage { file_stem: String, page_index: u32 },
    #[error("malformed template: {0}")]
    MalformedTemplate(String),
    #[error("cannot read template {path}: {message}")]
    Unreadable { path: String, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptTemplate {
    pub template_id: String,
    pub instruction_text: String,
    pub rules_text: String,
    pub schema_version: String,
}

impl PromptTemplate {
    /// Parses the template file format: `#` comment lines, `@key: value`
    /// headers, then `@@rules` and `@@instructions` sections.
    pub fn parse(text: &str) -> Result<Self, PromptError> {
        let malformed = |msg: &str| PromptError::MalformedTemplate(msg.to_owned());
        let mut template_id = None;
        let mut schema_version = None;
        let mut rules: Option<Vec<&str>> = None;
        let mut instructions: Option<Vec<&str>> = None;
        let mut section: Option<&str> = None;

        for line in text.lines() {
            match line.trim_end() {
                "@@rules" => {
                    section = Some("rules");
                    rules.get_or_insert_with(Vec::new);
                    continue;
                }
                "@@instructions" => {
                    section = Some("instructions");
                    instructions.get_or_insert_with(Vec::new);
                    continue;
                }
                _ => {}
            }
            match section {
                Some("rules") => rules.as_mut().unwrap().push(line),
                Some(_) => instructions.as_mut().unwrap().push(line),
                None => {
                    let trimmed = line.trim();
                    if trimmed.is_empty() || trimmed.starts_with('#') {
                        continue;
                    }
                    let header = trimmed
                        .strip_prefix('@')
                        .and_then(|h| h.split_once(':'))
                        .ok_or_else(|| malformed("expected `@key: value` header"))?;
                    match header.0.trim() {
                        "template_id" => template_id = Some(header.1.trim().to_owned()),
                        "schema_version" => schema_version = Some(header.1.trim().to_owned()),
                        other => {
                            return Err(PromptError::MalformedTemplate(format!(
                                "unknown header `{other}`"
                            )))
                        }
                    }
                }
            }
        }

        let template = Self {
            template_id: template_id.ok_or_else(|| malformed("missing @template_id"))?,
            schema_version: schema_version.ok_or_else(|| malformed("missing @schema_version"))?,
            rules_text: rules
                .ok_or_else(|| malformed("missing @@rules section"))?
                .join("\n")
                .trim()
                .to_owned(),
            instruction_text: instructions
                .ok_or_else(|| malformed("missing @@instructions section"))?
                .join("\n")
                .trim()
                .to_owned(),
        };
        template.validate()?;
        Ok(template)
    }

    pub fn load(path: &Path) -> Result<Self, PromptError> {
        let text = std::fs::read_to_string(path).map_err(|err| PromptError::Unreadable {
            path: path.display().to_string(),
            message: err.to_string(),
        })?;
        Self::parse(&text)
    }

    pub fn builtin() -> Self {
        Self::parse(DEFAULT_TEMPLATE_TEXT).expect("shipped template is valid")
    }

    pub fn validate(&self) -> Result<(), PromptError> {
        if self.template_id.is_empty() {
            return Err(PromptError::MalformedTemplate("empty template_id".into()));
        }
        if self.schema_version != "1" {
            return Err(PromptError::MalformedTemplate(format!(
                "unsupported schema_version `{}`",
                self.schema_version
            )));
        }
        for placeholder in [SCHEMA_PLACEHOLDER, RULES_PLACEHOLDER, PAGE_PLACEHOLDER] {
            let n = self.instruction_text.matches(placeholder).count();
            if n != 1 {
                return Err(PromptError::MalformedTemplate(format!(
                    "{placeholder} appears {n} times, expected once"
                )));
            }
        }
        Ok(())
    }

    fn schema_text(&self) -> &'static str {
        SCHEMA_V1
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptBundle {
    pub prompt_text: String,
    pub file_stem: String,
    pub page_index: u32,
    pub part_index: Option<u32>,
    pub estimated_input_tokens: u64,
    pub template_id: String,
    /// Lines in the submitted page text; bounds the number of output rows.
    pub page_line_count: u64,
}

/// `ceil(chars / 4)`.
pub fn estimate_tokens(text: &str) -> u64 {
    (text.chars().count() as u64).div_ceil(4)
}

/// Substitutes the schema, rules and page text into the template.
///
/// Substitution is a single left-to-right pass over the instruction text, so
/// page text that happens to contain a placeholder is inserted literally.
pub fn build_prompt(template: &PromptTemplate, page: &PageText) -> Result<PromptBundle, PromptError> {
    template.validate()?;
    if page.text.trim().is_empty() {
        return Err(PromptError::EmptyPage {
            file_stem: page.file_stem.clone(),
            page_index: page.page_index,
        });
    }

    let mut slots: Vec<(usize, &str, &str)> = [
        (SCHEMA_PLACEHOLDER, template.schema_text()),
        (RULES_PLACEHOLDER, template.rules_text.as_str()),
        (PAGE_PLACEHOLDER, page.text.as_str()),
    ]
    .into_iter()
    .map(|(placeholder, value)| {
        let at = template.instruction_text.find(placeholder).expect("validated");
        (at, placeholder, value)
    })
    .collect();
    slots.sort_by_key(|slot| slot.0);

    let source = &template.instruction_text;
    let mut prompt_text = String::with_capacity(source.len() + page.text.len() + 2048);
    let mut cursor = 0;
    for (at, placeholder, value) in slots {
        prompt_text.push_str(&source[cursor..at]);
        prompt_text.push_str(value);
        cursor = at + placeholder.len();
    }
    prompt_text.push_str(&source[cursor..]);

    Ok(PromptBundle {
        estimated_input_tokens: estimate_tokens(&prompt_text),
        prompt_text,
        file_stem: page.file_stem.clone(),
        page_index: page.page_index,
        part_index: None,
        template_id: template.template_id.clone(),
        page_line_count: page.text.lines().count() as u64,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BudgetVerdict {
    Pass {
        input_margin: u64,
        output_margin: u64,
    },
    /// Excess tokens over each budget; zero where that budget holds.
    Fail { input_excess: u64, output_excess: u64 },
}

impl BudgetVerdict {
    pub fn passed(&self) -> bool {
        matches!(self, Self::Pass { .. })
    }
}

pub fn assert_budget(bundle: &PromptBundle, profile: &ProviderProfile) -> BudgetVerdict {
    let input_limit = profile.input_token_budget.saturating_sub(RESERVED_OVERHEAD_TOKENS);
    let output_estimate = bundle.page_line_count * OUTPUT_TOKENS_PER_ROW;
    let input = bundle.estimated_input_tokens;
    let output_limit = profile.output_token_budget;
    if input <= input_limit && output_estimate <= output_limit {
        BudgetVerdict::Pass {
            input_margin: input_limit - input,
            output_margin: output_limit - output_estimate,
        }
    } else {
        BudgetVerdict::Fail {
            input_excess: input.saturating_sub(input_limit),
            output_excess: output_estimate.saturating_sub(output_limit),
        }
    }
}

/// What to do with one part of a page.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PartPlan {
    Submit(PromptBundle),
    /// Whitespace-only text; nothing to send.
    Skipped,
    /// A single line that still exceeds the budget.
    Oversized(BudgetVerdict),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlannedPart {
    /// `None` when the page was not split.
    pub part_index: Option<u32>,
    /// Index of the first page line covered by this part.
    pub first_line: usize,
    pub line_count: usize,
    pub plan: PartPlan,
}

/// Plans the provider calls for one page: a single prompt when the page fits
/// the budget, otherwise the page is halved at line boundaries until every
/// part fits. Parts concatenate back to the original page text.
pub fn plan_page(
    template: &PromptTemplate,
    page: &PageText,
    profile: &ProviderProfile,
) -> Result<Vec<PlannedPart>, PromptError> {
    template.validate()?;
    let lines: Vec<&str> = page.text.split_inclusive('\n').collect();
    let mut leaves = Vec::new();
    plan_range(template, page, profile, &lines, 0, lines.len().max(1), &mut leaves);

    let split = leaves.len() > 1;
    Ok(leaves
        .into_iter()
        .enumerate()
        .map(|(i, mut part)| {
            let part_index = split.then_some(i as u32);
            part.part_index = part_index;
            if let PartPlan::Submit(bundle) = &mut part.plan {
                bundle.part_index = part_index;
            }
            part
        })
        .collect())
}

fn plan_range(
    template: &PromptTemplate,
    page: &PageText,
    profile: &ProviderProfile,
    lines: &[&str],
    start: usize,
    end: usize,
    out: &mut Vec<PlannedPart>,
) {
    let end = end.min(lines.len());
    let text: String = lines[start.min(end)..end].concat();
    let part_page = PageText::new(page.file_stem.clone(), page.page_index, text);
    let mut leaf = PlannedPart {
        part_index: None,
        first_line: start,
        line_count: end.saturating_sub(start),
        plan: PartPlan::Skipped,
    };
    let bundle = match build_prompt(template, &part_page) {
        Ok(bundle) => bundle,
        Err(_) => {
            out.push(leaf);
            return;
        }
    };
    let verdict = assert_budget(&bundle, profile);
    if verdict.passed() {
        leaf.plan = PartPlan::Submit(bundle);
        out.push(leaf);
    } else if end - start <= 1 {
        leaf.plan = PartPlan::Oversized(verdict);
        out.push(leaf);
    } else {
        let mid = start + (end - start).div_ceil(2);
        plan_range(template, page, profile, lines, start, mid, out);
        plan_range(template, page, profile, lines, mid, end, out);
    }
}
