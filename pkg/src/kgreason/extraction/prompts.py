"""Prompt templates for distillation and triple extraction."""

import json
import re

DISTILL_SYSTEM = "You respond with a concise scientific summary, including reasoning. You never use names or references."

SUMMARY_PROMPT = (
    'In a matter-of-fact voice, rewrite this "{text}". The writing must stand on its own and provide all '
    "background needed, and include details.  Do not include names, figures, plots or citations in your "
    "response, only facts."
)

BULLETS_PROMPT = (
    'Provide a bullet point list of the key facts and reasoning in "{summary}". The writing must stand on its '
    "own and provide all background needed, and include details. Do not include figures, plots or citations "
    "in your response. Think step by step."
)

TITLE_SYSTEM = "You are a scientist who writes a scientific paper. You never use names or citations."

TITLE_PROMPT = (
    'Provide a one-sentence title of this text: "{summary}". Make sure the title can be understood fully '
    'without any other context. Do not use the word "title", just provide the answer.'
)

TRIPLE_SCHEMA = [
    {
        "node_1": "A concept from extracted ontology",
        "node_2": "A related concept from extracted ontology",
        "edge": "Relationship between the two concepts, node_1 and node_2, succinctly described",
    }
]

EXAMPLE_CONTEXT = "Silk is a strong natural fiber used to catch prey in a web. Beta-sheets control its strength."

EXAMPLE_TRIPLES = [
    {"node_1": "spider silk", "node_2": "fiber", "edge": "is"},
    {"node_1": "beta-sheets", "node_2": "strength", "edge": "control"},
    {"node_1": "silk", "node_2": "prey", "edge": "catches"},
]

ONTOLOGY_SYSTEM = (
    "You are a network ontology graph maker who extracts terms and their relations from a given context, "
    "using category theory. You are provided with a context chunk (delimited by ```) Your task is to extract "
    "the ontology of terms mentioned in the given context. These terms should represent the key concepts as "
    "per the context, including well-defined and widely used names of materials, systems, methods. \n\n"
    "Format your output as a list of JSON. Each element of the list contains a pair of terms and the relation "
    "between them, like the following: \n"
    + json.dumps(TRIPLE_SCHEMA, indent=2)
    + "\n\nExample:\n\nContext: ```" + EXAMPLE_CONTEXT + "```\n"
    + json.dumps(EXAMPLE_TRIPLES, indent=2)
    + "\n\nAnalyze the text carefully and produce around 10 triplets, making sure they reflect consistent ontologies."
)

ONTOLOGY_USER = "Context: ```{context}``` \n\nOutput: "

REFINE_PROMPT = (
    "Read this context: ```{context}```.\n\n"
    "Read this ontology: ```{response}```.\n\n"
    "Improve the ontology by renaming nodes so that they have consistent labels that are widely used in the "
    "field of materials science."
)

FORMAT_PROMPT = (
    "Context: ```{response}``` \n\n"
    "Output the ontology above as a JSON list in exactly this format, with no other text:\n"
    + json.dumps(TRIPLE_SCHEMA, indent=2)
)


def fill(template: str, **values: str) -> str:
    """Substitute ``{name}`` slots in one pass, leaving every other brace alone."""
    return re.sub(r"\{(\w+)\}", lambda m: values.get(m.group(1), m.group(0)), template)
