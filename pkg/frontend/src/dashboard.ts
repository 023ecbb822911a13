// Agreement dashboard view model. Every tile is a *formatting* of one hub
// report field; the raw report rides along untouched so the rendered
// values are verifiable field-for-field against the hub JSON.

import { AgreementReport, SessionStatus } from './api.js';
import { formatCount, formatPair, formatPercent } from './format.js';

export type DashboardViewModel = {
  kind: 'report';
  raw: AgreementReport;
  averageKappa: string;
  pairwise: { pair: string; kappa: string }[];
  majorityCount: string;
  majorityCoverage: string;
  unanimousCount: string;
  ties: number;
  modelAccuracyMajority: string;
  modelAccuracyUnanimous: string;
  modelKappaMajority: string;
  modelKappaUnanimous: string;
};

export type ProgressViewModel = {
  kind: 'in-progress';
  raw: SessionStatus;
  total: number;
  bars: { annotator: string; done: number; total: number; label: string }[];
};

export function buildDashboard(report: AgreementReport): DashboardViewModel {
  return {
    kind: 'report',
    raw: report,
    averageKappa: formatPercent(report.average_kappa),
    pairwise: report.pairwise_kappa.map((entry) => ({
      pair: formatPair(entry.annotators),
      kappa: formatPercent(entry.kappa),
    })),
    majorityCount: formatCount(report.n_majority, report.n_examples),
    majorityCoverage: formatPercent(report.majority_coverage),
    unanimousCount: formatCount(report.n_unanimous, report.n_examples),
    ties: report.ties.length,
    modelAccuracyMajority: formatPercent(report.model_accuracy_majority),
    modelAccuracyUnanimous: formatPercent(report.model_accuracy_unanimous),
    modelKappaMajority: formatPercent(report.model_kappa_majority),
    modelKappaUnanimous: formatPercent(report.model_kappa_unanimous),
  };
}

export function buildProgress(status: SessionStatus): ProgressViewModel {
  return {
    kind: 'in-progress',
    raw: status,
    total: status.total,
    bars: status.annotators.map((annotator) => ({
      annotator,
      done: status.per_annotator_done[annotator] ?? 0,
      total: status.total,
      label: formatCount(status.per_annotator_done[annotator] ?? 0, status.total),
    })),
  };
}
