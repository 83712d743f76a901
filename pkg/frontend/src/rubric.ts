/**
 * The ten methodology metrics and their three-level rubric options.
 *
 * Users pick the statement that matches their study; the numeric score is
 * shown secondarily. Low scores describe conditions that let a study work
 * with fewer participants, high scores conditions that demand more.
 */

export const METRIC_KEYS = [
  "research_scope",
  "researcher_competence",
  "information_power",
  "interview_count",
  "interview_duration",
  "observation_duration",
  "homogeneity",
  "participant_originality",
  "data_variety",
  "data_quality",
] as const;

export type MetricKey = (typeof METRIC_KEYS)[number];

export const DESIGNS = [
  { value: "case_study", label: "Case study" },
  { value: "grounded_theory", label: "Grounded theory" },
  { value: "phenomenology", label: "Phenomenology" },
  { value: "narrative", label: "Narrative research" },
  { value: "ethnographic", label: "Ethnographic research" },
] as const;

export interface RubricOption {
  score: number;
  label: string;
}

export interface MetricRubric {
  key: MetricKey;
  title: string;
  options: [RubricOption, RubricOption, RubricOption];
}

const LEVELS = [10, 15, 20] as const;

function metric(key: MetricKey, title: string,
                low: string, mid: string, high: string): MetricRubric {
  return {
    key,
    title,
    options: [
      { score: LEVELS[0], label: low },
      { score: LEVELS[1], label: mid },
      { score: LEVELS[2], label: high },
    ],
  };
}

export const RUBRIC: readonly MetricRubric[] = [
  metric("research_scope", "Research scope",
    "Narrow, tightly focused question",
    "Moderate scope",
    "Broad question spanning many perspectives"),
  metric("researcher_competence", "Researcher competence",
    "Highly experienced researcher/analyst",
    "Some prior qualitative experience",
    "Early-career or first qualitative study"),
  metric("information_power", "Information power",
    "Participants are experts on the topic",
    "Participants are moderately informed",
    "Participants have limited topic knowledge"),
  metric("interview_count", "Interviews per participant",
    "More than five sessions per participant",
    "Three to five sessions",
    "One or two sessions"),
  metric("interview_duration", "Interview duration",
    "Over two hours per session",
    "One to two hours",
    "Under an hour"),
  metric("observation_duration", "Observation duration",
    "Extended or repeated field observation",
    "Moderate observation time",
    "Brief or no field observation"),
  metric("homogeneity", "Participant heterogeneity",
    "Homogeneous participant group",
    "Mixed group",
    "Highly heterogeneous group"),
  metric("participant_originality", "Participant originality",
    "Participants contribute highly original information",
    "Some novel information expected",
    "Participants add little new information"),
  metric("data_variety", "Data variety (triangulation)",
    "Multiple triangulated data sources",
    "Two data sources",
    "Single data source"),
  metric("data_quality", "Expected data quality",
    "Rich, high-quality data expected",
    "Average data quality",
    "Uncertain or low data quality"),
];

export const METRIC_TITLES: Record<string, string> = Object.fromEntries(
  RUBRIC.map((m) => [m.key, m.title]),
);
