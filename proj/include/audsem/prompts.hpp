#pragma once

#include <string_view>

// Verbatim prompt templates. Placeholders use {name}.
namespace audsem::synth::prompts {

inline constexpr std::string_view kJudgeTemplate = R"PROMPT(You are a strict judge for an audio caption generator. Your task is to verify whether the generated output adheres to all the rules from the original prompt. In particular, check the following:
1. The 'thinking' process should contain a Chain-of-Thought (CoT) reasoning process.
2. The 'thinking' process must not mention "predictions per second" or any similar phrasing.
3. The 'thinking' process must not include any of the original data fields directly.
4. The 'answer' should be a valid audio caption containing no visual elements or contexts.

Examine the generated output below carefully and respond with a JSON object that includes:
    - "valid": set to true if all rules are followed, or false if any rule is broken.
    - "reason": if false, a brief explanation of which rule(s) were violated.

--- Generated Output Start ---
{generated_output}
--- Generated Output End ---)PROMPT";

inline constexpr std::string_view kGenerationTemplate = R"PROMPT(You are an expert audio caption generator to create training data for an audio model. Your task is to create a detailed caption that describes what happens in an audio segment, including a Chain-of-Thought (CoT) reasoning process. You will be provided with various types of information extracted from audio processing models and supporting visual context. Your goal is to write a thinking process and answer as if you would only have the audio itself, without any of the following information. 

Given Information:
1. Basic Information:
    - Video ID: {video_id}
    - Time Segment: {start} to {end} seconds
    - Original Closed Caption: {text} (This is the most important information to keep in mind)

2. Model-Generated Audio Information:
    - Audio Caption: {audio_caption}
    - Audio Tags (each with a confidence score): {audio_tags}
    - Short Audio Caption: {conette_candidates}
    - Predictions Per Second (key is the second, value is dict of sound and confidence score): {sat_predictions}
    {music_caption_section}

3. Supporting Visual Context:
    Scene Description: {caption}
    Detected Objects (COCO labels): {objects}
    Scene Classification (Places365): {places}

Context Evaluation Guidelines:
1. Use visual information ONLY if it:
    a) Strongly aligns with AND confirms audio evidence
    b) Provides essential acoustic environment context unavailable from audio
2. Ignore visual information if:
    a) Contradicts audio evidence
    b) Talks about text/graphics/static images
    c) Describes visual-only elements
NEVER mention the visual context or visual elements in the thinking step, ONLY use it to infer the audio context.

In your output in the thinking step, analyze the audio scene in detail, reason about the primary and background sounds, and describe what happens in the audio. Include key events and activities, and the environment and context. 

Guidelines:
- Use natural, descriptive language
- The thinking should be at least 50 words
- Keep the final caption under 50 words
- Do not include timestamps
- Do not mention specific speech content unless crucial to understanding the audio scene
- Use the prediction per second to determine the order of the sounds in the caption
- The reasoning process MUST include thought expressions in natural language. This includes discourse markers, hesitation phrases, cognitive markers and casual suggestions. 
- NEVER describe or mention the original data fields directly in your reasoning process. You are generating training data for an audio model, and the model should learn to reason from the audio itself and NOT from the extracted data given including any of the visual context. 
    
DO NOT mention any of the outputs of the models in the thinking step.

Please provide your response as a JSON object with the following keys:
- thinking: The thinking process
- answer: The caption)PROMPT";

inline constexpr std::string_view kPrependSemantic = R"PROMPT(You are given a question and an audio clip. Your task is to answer the question based on the audio clip. First, think about the question and the audio clip and put your thoughts in <think> and </think> tags. Then reason about the semantic elements involved in the audio clip and put your reasoning in <semantic_elements> and </semantic_elements> tags. Then answer the question based on the audio clip, put your answer in <answer> and </answer> tags.)PROMPT";

inline constexpr std::string_view kPrependPlain = R"PROMPT(You are given a question and an audio clip. Your task is to answer the question based on the audio clip. First, think about the question and the audio clip and put your thoughts in <think> and </think> tags. Then answer the question based on the audio clip, put your answer in <answer> and </answer> tags. )PROMPT";

}  // namespace audsem::synth::prompts
