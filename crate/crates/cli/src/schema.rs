/// JSON Schema (draft 2020-12) of `eval_report.json`.
pub const EVAL_REPORT_SCHEMA: &str = r##"{
  "$schema": "https://json-schema.org/draft/2020-12/schema",
  "title": "ordkern evaluation report",
  "type": "object",
  "required": [
    "accuracy", "n_folds", "n_correct", "n_failures", "best_lambda", "best_c",
    "tuning", "lambda_grid", "c_grid", "max_kkt_residual", "per_fold"
  ],
  "additionalProperties": false,
  "properties": {
    "accuracy": { "type": "number", "minimum": 0, "maximum": 1 },
    "n_folds": { "type": "integer", "minimum": 1 },
    "n_correct": { "type": "integer", "minimum": 0 },
    "n_failures": { "type": "integer", "minimum": 0 },
    "best_lambda": { "type": "number", "exclusiveMinimum": 0 },
    "best_c": { "type": "number", "exclusiveMinimum": 0 },
    "tuning": { "enum": ["nested", "non_nested"] },
    "lambda_grid": { "type": "array", "minItems": 1, "items": { "type": "number", "exclusiveMinimum": 0 } },
    "c_grid": { "type": "array", "minItems": 1, "items": { "type": "number", "exclusiveMinimum": 0 } },
    "max_kkt_residual": { "type": "number", "minimum": 0 },
    "per_fold": {
      "type": "array",
      "items": {
        "type": "object",
        "required": ["id", "true_label", "predicted", "decision_value", "lambda", "c", "failure"],
        "additionalProperties": false,
        "properties": {
          "id": { "type": "string" },
          "true_label": { "enum": [1, -1] },
          "predicted": { "enum": [1, -1, null] },
          "decision_value": { "type": ["number", "null"] },
          "lambda": { "type": ["number", "null"] },
          "c": { "type": ["number", "null"] },
          "failure": { "type": ["string", "null"] }
        }
      }
    }
  }
}
"##;
