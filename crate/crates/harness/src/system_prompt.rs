use graphblocks::Catalog;

use crate::ablation::Ablation;

const PROPOSED_TEMPLATE: &str = include_str!("../templates/system_proposed.txt");
const ALTERNATIVE_TEMPLATE: &str = include_str!("../templates/system_alternative.txt");

/// Marker replaced by the reference-node listing.
pub const PLACEHOLDER: &str = "{reference_nodes}";

/// Fills the template for `ablation` with `reference_text`. Everything
/// outside the placeholder is reproduced unchanged.
pub fn build_system_prompt(ablation: Ablation, reference_text: &str) -> String {
    let template = match ablation {
        Ablation::Alternative => ALTERNATIVE_TEMPLATE,
        _ => PROPOSED_TEMPLATE,
    };
    template.replacen(PLACEHOLDER, reference_text, 1)
}

/// System prompt with the builtin catalog's reference in the ablation's style.
pub fn default_system_prompt(ablation: Ablation) -> String {
    build_system_prompt(ablation, &Catalog::builtin().emit_reference(ablation.reference_style()))
}

/// The user turn sent alongside the system prompt.
pub fn user_message(prompt_text: &str) -> String {
    format!("**User Query**: {prompt_text}")
}
