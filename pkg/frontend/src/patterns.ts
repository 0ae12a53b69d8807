/** The fixed nine-pattern vocabulary the service exports and scores by.
 *
 * The checklist in the annotation form is exactly this list, in this
 * order; it is part of the HTTP contract, not something the UI edits.
 */

export const PATTERNS = [
  "orientation_direction",
  "presence_of_features",
  "state_condition",
  "quantity_count",
  "positional_relational",
  "color_appearance",
  "structural_physical",
  "text",
  "viewpoint_perspective",
] as const;

export type Pattern = (typeof PATTERNS)[number];

export const PATTERN_TITLES: Record<Pattern, string> = {
  orientation_direction: "Orientation and Direction",
  presence_of_features: "Presence of Specific Features",
  state_condition: "State and Condition",
  quantity_count: "Quantity and Count",
  positional_relational: "Positional and Relational Context",
  color_appearance: "Color and Appearance",
  structural_physical: "Structural and Physical Characteristics",
  text: "Text",
  viewpoint_perspective: "Viewpoint and Perspective",
};

export function isPattern(value: string): value is Pattern {
  return (PATTERNS as readonly string[]).includes(value);
}
