/** Annotation form model and validation.
 *
 * The rules mirror what the service will accept, so a form that passes
 * here should only be rejected by the server on a genuine conflict; the
 * server's verdict is still authoritative and shown verbatim when it
 * disagrees.
 */

import type { AnnotationIn } from "./api.js";
import { isPattern } from "./patterns.js";

export type Status = "draft" | "accepted" | "rejected";

export interface QuestionForm {
  text: string;
  options: string[];
  correctIndex: number | null;
}

export interface AnnotationForm {
  author: string;
  status: Status;
  patterns: string[];
  questions: [QuestionForm, QuestionForm];
}

/** Field-keyed messages; an empty map means the form can be submitted. */
export interface FormErrors {
  author?: string;
  patterns?: string;
  questions: [QuestionErrors, QuestionErrors];
}

export interface QuestionErrors {
  text?: string;
  options?: string;
  correctIndex?: string;
}

export function emptyForm(author = ""): AnnotationForm {
  const question = (): QuestionForm => ({
    text: "",
    options: ["", ""],
    correctIndex: null,
  });
  return {
    author,
    status: "draft",
    patterns: [],
    questions: [question(), question()],
  };
}

function validateQuestion(q: QuestionForm): QuestionErrors {
  const errors: QuestionErrors = {};
  if (q.text.trim() === "") {
    errors.text = "question text is required";
  }
  const options = q.options.map((o) => o.trim());
  if (options.length < 2) {
    errors.options = "at least two options are required";
  } else if (options.some((o) => o === "")) {
    errors.options = "options must be non-empty";
  } else if (new Set(options).size !== options.length) {
    errors.options = "options must be distinct";
  }
  if (q.correctIndex === null) {
    errors.correctIndex = "pick the correct option";
  } else if (q.correctIndex < 0 || q.correctIndex >= q.options.length) {
    errors.correctIndex = "correct option is out of range";
  }
  return errors;
}

export function validateForm(form: AnnotationForm): FormErrors {
  const errors: FormErrors = {
    questions: [
      validateQuestion(form.questions[0]),
      validateQuestion(form.questions[1]),
    ],
  };
  if (form.author.trim() === "") {
    errors.author = "author is required";
  }
  if (form.patterns.length === 0) {
    errors.patterns =
      form.status === "accepted"
        ? "an accepted pair needs at least one pattern"
        : "tag at least one pattern";
  } else if (form.patterns.some((p) => !isPattern(p))) {
    errors.patterns = "unknown pattern tag";
  } else if (new Set(form.patterns).size !== form.patterns.length) {
    errors.patterns = "duplicate pattern tags";
  }
  return errors;
}

export function isValid(errors: FormErrors): boolean {
  if (errors.author || errors.patterns) {
    return false;
  }
  return errors.questions.every((q) => Object.keys(q).length === 0);
}

/** Convert a validated form into the PUT body; slot k asks about image k. */
export function toRequestBody(form: AnnotationForm): AnnotationIn {
  return {
    author: form.author.trim(),
    status: form.status,
    patterns: [...form.patterns],
    questions: form.questions.map((q, slot) => ({
      image_slot: slot,
      text: q.text.trim(),
      options: q.options.map((o) => o.trim()),
      correct_index: q.correctIndex ?? 0,
    })),
  };
}
