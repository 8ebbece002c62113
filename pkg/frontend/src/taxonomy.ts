// Category colors and axis helpers for badges. The category of an axis id is
// its prefix (letters before the hyphen); the in-distribution pseudo-axis
// "ID" has no category.

export const CATEGORY_COLORS: Record<string, string> = {
  V: "#4f8f3a", // green
  S: "#e08a2e", // orange
  B: "#3a6fd8", // blue
  VB: "#2fb3b3", // cyan
  SB: "#8a4fd8", // purple
  VS: "#8a6a4f", // brown
  VSB: "#7a7a7a", // gray
};

export const SUPPORTED_PROPOSAL_AXES = [
  "V-OBJ",
  "S-PROP",
  "VB-POSE",
  "SB-VRB",
  "VSB-NOBJ",
] as const;

export function axisCategory(axisId: string): string | null {
  if (axisId === "ID") return null;
  const prefix = axisId.split("-", 1)[0];
  return prefix in CATEGORY_COLORS ? prefix : null;
}

export function categoryColor(axisId: string): string {
  const category = axisCategory(axisId);
  return category ? CATEGORY_COLORS[category] : "#555555";
}

// client-side mirror of the per-axis field contract: visual change present
// iff the category has V, language change present iff it has S
export function proposalFieldsMatchAxis(
  axisId: string,
  fields: { visualChange: string | null; languageChange: string | null },
): boolean {
  const category = axisCategory(axisId);
  if (!category) return false;
  const wantsVisual = category.includes("V");
  const wantsLanguage = category.includes("S");
  const hasVisual = !!fields.visualChange && fields.visualChange.trim() !== "";
  const hasLanguage = !!fields.languageChange && fields.languageChange.trim() !== "";
  return wantsVisual === hasVisual && wantsLanguage === hasLanguage;
}
