//! Prompt templates shipped with the CLI.
//!
//! Templates carry a `{question}` placeholder; everything else is emitted
//! verbatim, including the chat markers the target model family expects.

/// Chat prefix before the user turn.
pub const CHAT_PREFIX: &str = "<｜begin▁of▁sentence｜><｜User｜>";

/// Chat marker opening the assistant turn.
pub const CHAT_SUFFIX: &str = "<｜Assistant｜>";

/// The boxed-answer instruction appended to every question.
pub const INSTRUCTION: &str =
    "Let's think step by step and output the final answer within \\boxed{}.";

/// Explains the worker-spawning format to the model.
pub const PARALLEL_INSTRUCTION: &str = "You can spawn multiple workers to solve this problem in \
    parallel. The workers' thoughts are enclosed within <spawn_workers></spawn_workers> tags, \
    and each worker's thought is enclosed within <worker_i></worker_i> tags, where i is the \
    worker number, i.e. <spawn_workers><worker_1>worker 1's thought</worker_1><worker_2>worker \
    2's thought</worker_2>...</spawn_workers>.";

/// Placeholder substituted with the question text.
pub const QUESTION_PLACEHOLDER: &str = "{question}";

/// Prompt for parallel (director/worker) inference and training.
pub fn parallel_prompt(question: &str) -> String {
    format!("{CHAT_PREFIX}{question} {PARALLEL_INSTRUCTION} {INSTRUCTION}{CHAT_SUFFIX}")
}

/// Prompt for evaluating the sequential baseline, with the opened think tag.
pub fn sequential_prompt(question: &str) -> String {
    format!("{CHAT_PREFIX}{question} {INSTRUCTION}{CHAT_SUFFIX}<think>\n")
}

/// Bare prompt used when generating sequential reasoning traces.
pub fn sequential_generation_prompt(question: &str) -> String {
    format!("{question} {INSTRUCTION}<think>\n")
}

/// Renders any template containing `{question}`.
pub fn render_template(template: &str, question: &str) -> String {
    template.replace(QUESTION_PLACEHOLDER, question)
}
