// Answer-span verification and splitting.
//
// answer_start counts Unicode scalar values (the service's convention),
// while JS string indices count UTF-16 code units, so all slicing here
// works on code-point arrays. The UI highlights a span only after this
// re-check confirms the substring really sits at the reported offset.

export type SpanSplit = {
  ok: boolean;
  before: string;
  span: string;
  after: string;
};

export function splitAnswerSpan(context: string, answer: string, start: number): SpanSplit {
  const failed: SpanSplit = { ok: false, before: context, span: "", after: "" };
  if (start < 0 || answer.length === 0) {
    return failed;
  }
  const contextPoints = Array.from(context);
  const answerPoints = Array.from(answer);
  const end = start + answerPoints.length;
  if (end > contextPoints.length) {
    return failed;
  }
  if (contextPoints.slice(start, end).join("") !== answer) {
    return failed;
  }
  return {
    ok: true,
    before: contextPoints.slice(0, start).join(""),
    span: answer,
    after: contextPoints.slice(end).join(""),
  };
}
