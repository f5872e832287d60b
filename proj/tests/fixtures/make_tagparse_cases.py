# Writes tagparse_cases.jsonl. Each case: text, require_semantic, expected
# violations (sorted by code order), spans. Expectations are written by hand
# per family; the word fillers only vary the payload.
import json

ORDER = ["missing-tag", "duplicate-tag", "out-of-order", "stray-content", "unclosed-tag"]
cases = []

def case(name, text, req, viol, think="", sem=None, answer=""):
    viol = sorted(viol, key=ORDER.index)
    cases.append({"name": name, "text": text, "require_semantic": req, "violations": viol,
                  "well_formed": not viol, "think": think, "semantic": sem, "answer": answer})

fill = [("a b", "c"), ("the dog barks twice", "A dog barks."), ("x", "B) a dog barking"),
        ("rain on a tin roof, steady", "Rain falls.")]

for i, (t, a) in enumerate(fill):
    case(f"plain-{i}", f"<think>{t}</think><answer>{a}</answer>", False, [], t, None, a)
    case(f"spaced-{i}", f"\n  <think>\n {t} \n</think>\n\n<answer>\n {a}\n</answer>\n", False, [], t, None, a)
    case(f"alias-{i}", f"<thinking>{t}</thinking>\n<answer>{a}</answer>", False, [], t, None, a)
    case(f"semantic-optional-{i}", f"<think>{t}</think><semantic_elements>s {i}</semantic_elements><answer>{a}</answer>",
         False, [], t, f"s {i}", a)
    case(f"semantic-required-{i}",
         f"<think>{t}</think>\n<semantic_elements>\n1. x:\n- y\n</semantic_elements>\n<answer>{a}</answer>",
         True, [], t, "1. x:\n- y", a)
    case(f"missing-semantic-{i}", f"<think>{t}</think><answer>{a}</answer>", True, ["missing-tag"], t, None, a)
    case(f"missing-think-{i}", f"<answer>{a}</answer>", False, ["missing-tag"], "", None, a)
    case(f"missing-answer-{i}", f"<think>{t}</think>", False, ["missing-tag"], t, None, "")
    case(f"duplicate-think-{i}", f"<think>{t}</think><think>more</think><answer>{a}</answer>", False,
         ["duplicate-tag"], t, None, a)
    case(f"duplicate-answer-{i}", f"<think>{t}</think><answer>{a}</answer><answer>again</answer>", False,
         ["duplicate-tag"], t, None, a)
    case(f"answer-first-{i}", f"<answer>{a}</answer><think>{t}</think>", False, ["out-of-order"], t, None, a)
    case(f"semantic-last-{i}",
         f"<think>{t}</think><answer>{a}</answer><semantic_elements>s</semantic_elements>", True,
         ["out-of-order"], t, "s", a)
    case(f"leading-chatter-{i}", f"Sure! <think>{t}</think><answer>{a}</answer>", False, ["stray-content"], t, None, a)
    case(f"between-{i}", f"<think>{t}</think> so <answer>{a}</answer>", False, ["stray-content"], t, None, a)
    case(f"trailing-{i}", f"<think>{t}</think><answer>{a}</answer> hope this helps", False, ["stray-content"],
         t, None, a)
    case(f"unclosed-answer-{i}", f"<think>{t}</think><answer>{a}", False, ["unclosed-tag"], t, None, "")
    case(f"unclosed-think-{i}", f"<think>{t}<answer>{a}</answer>", False, ["unclosed-tag"], "", None, a)
    case(f"mixed-spelling-{i}", f"<think>{t}</thinking><answer>{a}</answer>", False, ["unclosed-tag"], "", None, a)

# one-off shapes
case("empty", "", False, ["missing-tag"])
case("blank", "  \n\t ", False, ["missing-tag"])
case("no-tags", "A dog barks.", False, ["missing-tag", "stray-content"])
case("empty-spans", "<think></think><answer></answer>", False, [], "", None, "")
case("angle-brackets-inside", "<think>a < b > c</think><answer>x<y</answer>", False, [], "a < b > c", None, "x<y")
case("uppercase-tags", "<THINK>a</THINK><answer>b</answer>", False, ["missing-tag", "stray-content"], "", None, "b")
case("attribute-tag", '<think id="1">a</think><answer>b</answer>', False, ["missing-tag", "stray-content"],
     "", None, "b")
case("stray-close", "<think>a</think></think><answer>b</answer>", False, ["stray-content"], "a", None, "b")
case("close-before-open", "</answer><think>a</think><answer>b</answer>", False, ["stray-content"], "a", None, "b")
case("nested-answer", "<think>a <answer>b</answer> c</think><answer>d</answer>", False,
     ["duplicate-tag", "stray-content", "unclosed-tag"], "", None, "b")
case("unclosed-fallback-only", "<answer>B) dog barking", False, ["missing-tag", "unclosed-tag"])
case("alias-duplicate", "<think>a</think><thinking>b</thinking><answer>c</answer>", False, ["duplicate-tag"],
     "a", None, "c")
case("semantic-first", "<semantic_elements>s</semantic_elements><think>a</think><answer>c</answer>", True,
     ["out-of-order"], "a", "s", "c")
case("semantic-after-answer-optional", "<think>a</think><answer>c</answer><semantic_elements>s</semantic_elements>",
     False, ["out-of-order"], "a", "s", "c")
case("duplicate-semantic", "<think>a</think><semantic_elements>s</semantic_elements>"
     "<semantic_elements>t</semantic_elements><answer>c</answer>", True, ["duplicate-tag"], "a", "s", "c")
case("all-reversed", "<answer>c</answer><semantic_elements>s</semantic_elements><think>a</think>", True,
     ["out-of-order"], "a", "s", "c")
case("crlf", "<think>\r\na b\r\n</think>\r\n<answer>\r\nc\r\n</answer>\r\n", False, [], "a b", None, "c")
case("answer-only-closing", "<think>a</think>c</answer>", False, ["missing-tag", "stray-content"], "a", None, "")
case("think-unclosed-at-end", "<answer>c</answer><think>a", False, ["out-of-order", "unclosed-tag"], "", None, "c")
case("partial-open-tag", "<think>a</think><answer c</answer>", False, ["missing-tag", "stray-content"],
     "a", None, "")
case("tab-separated", "\t<think>a</think>\t<answer>b</answer>\t", False, [], "a", None, "b")
case("multiline-answer", "<think>one two three</think>\n<answer>\nline one\nline two\n</answer>", False, [],
     "one two three", None, "line one\nline two")
case("think-with-answer-word", "<think>the answer is b</think><answer>b</answer>", False, [],
     "the answer is b", None, "b")
case("semantic-required-reversed-think-answer",
     "<answer>c</answer><think>a</think>", True, ["missing-tag", "out-of-order"], "a", None, "c")
case("unclosed-semantic", "<think>a</think><semantic_elements>s<answer>c</answer>", True, ["unclosed-tag"],
     "a", None, "c")
case("blank-between", "<think>a</think>   \n  <answer>b</answer>", False, [], "a", None, "b")
case("duplicate-and-stray", "x<think>a</think><think>b</think><answer>c</answer>", False,
     ["duplicate-tag", "stray-content"], "a", None, "c")
case("close-wrong-section", "<think>a</answer><answer>b</answer>", False, ["unclosed-tag"], "", None, "b")

assert len(cases) == 100, len(cases)
with open("tagparse_cases.jsonl", "w") as f:
    for c in cases:
        f.write(json.dumps(c) + "\n")
