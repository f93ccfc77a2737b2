// Single in-memory store updated by seq-ordered reducers. The UI is
// stateless beyond this: every displayed number comes from the gateway,
// never from client-side computation.

import type {
	AuditReportView,
	CharterDocument,
	GovernanceEvent,
	JobDetail,
	JobSummary,
	LedgerSummary,
	TokensSummary,
	TrustSummary,
} from "./types.js"

export interface AppState {
	events: GovernanceEvent[] // strictly ascending seq, no duplicates
	lastSeq: number
	jobs: JobSummary[]
	selectedJobId: string | null
	jobDetail: JobDetail | null
	auditReports: AuditReportView[]
	ledger: LedgerSummary | null
	trust: TrustSummary | null
	tokens: TokensSummary | null
	charter: CharterDocument | null
	charterErrorPaths: string[]
	charterSaved: boolean
	gatewayUp: boolean
	lastEventAt: number | null // ms epoch of the last received event page
	notice: string | null
}

export const initialState: AppState = {
	events: [],
	lastSeq: 0,
	jobs: [],
	selectedJobId: null,
	jobDetail: null,
	auditReports: [],
	ledger: null,
	trust: null,
	tokens: null,
	charter: null,
	charterErrorPaths: [],
	charterSaved: false,
	gatewayUp: true,
	lastEventAt: null,
	notice: null,
}

export type Action =
	| { type: "events_received"; events: GovernanceEvent[]; at: number }
	| { type: "jobs_loaded"; jobs: JobSummary[] }
	| { type: "job_selected"; jobId: string | null }
	| { type: "job_detail_loaded"; detail: JobDetail }
	| { type: "audit_reports_loaded"; reports: AuditReportView[] }
	| { type: "summaries_loaded"; ledger: LedgerSummary; trust: TrustSummary; tokens: TokensSummary }
	| { type: "charter_loaded"; charter: CharterDocument }
	| { type: "charter_saved"; charter: CharterDocument }
	| { type: "charter_save_failed"; paths: string[]; message: string }
	| { type: "gateway_down" }
	| { type: "gateway_up" }
	| { type: "notice"; message: string | null }

export function reduce(state: AppState, action: Action): AppState {
	switch (action.type) {
		case "events_received": {
			// keep only events newer than anything seen; pages may overlap
			const fresh = action.events
				.filter((e) => e.seq > state.lastSeq)
				.sort((a, b) => a.seq - b.seq)
			const deduped: GovernanceEvent[] = []
			let last = state.lastSeq
			for (const event of fresh) {
				if (event.seq > last) {
					deduped.push(event)
					last = event.seq
				}
			}
			if (deduped.length === 0) {
				return { ...state, gatewayUp: true }
			}
			return {
				...state,
				events: state.events.concat(deduped),
				lastSeq: last,
				lastEventAt: action.at,
				gatewayUp: true,
			}
		}
		case "jobs_loaded":
			return { ...state, jobs: action.jobs, gatewayUp: true }
		case "job_selected":
			return {
				...state,
				selectedJobId: action.jobId,
				jobDetail:
					action.jobId && state.jobDetail?.job_id === action.jobId ? state.jobDetail : null,
			}
		case "job_detail_loaded":
			return { ...state, jobDetail: action.detail, selectedJobId: action.detail.job_id }
		case "audit_reports_loaded":
			return { ...state, auditReports: action.reports }
		case "summaries_loaded":
			return {
				...state,
				ledger: action.ledger,
				trust: action.trust,
				tokens: action.tokens,
				gatewayUp: true,
			}
		case "charter_loaded":
			return { ...state, charter: action.charter, charterErrorPaths: [], charterSaved: false }
		case "charter_saved":
			return { ...state, charter: action.charter, charterErrorPaths: [], charterSaved: true }
		case "charter_save_failed":
			return {
				...state,
				charterErrorPaths: action.paths,
				charterSaved: false,
				notice: action.message,
			}
		case "gateway_down":
			return { ...state, gatewayUp: false }
		case "gateway_up":
			return { ...state, gatewayUp: true }
		case "notice":
			return { ...state, notice: action.message }
	}
}

export type Listener = (state: AppState) => void

export class Store {
	private state: AppState
	private listeners: Listener[] = []

	constructor(state: AppState = initialState) {
		this.state = state
	}

	get(): AppState {
		return this.state
	}

	dispatch(action: Action): AppState {
		this.state = reduce(this.state, action)
		for (const listener of this.listeners) {
			listener(this.state)
		}
		return this.state
	}

	subscribe(listener: Listener): () => void {
		this.listeners.push(listener)
		return () => {
			this.listeners = this.listeners.filter((l) => l !== listener)
		}
	}
}

// derived views -----------------------------------------------------------------

export function selectedJob(state: AppState): JobSummary | null {
	if (!state.selectedJobId) return null
	return state.jobs.find((j) => j.job_id === state.selectedJobId) ?? null
}

export function averageTrust(state: AppState): number | null {
	const scores = Object.values(state.trust?.agents ?? {})
	if (scores.length === 0) return state.trust ? state.trust.base_score : null
	return Math.round(scores.reduce((a, b) => a + b, 0) / scores.length)
}

export function reportsForJob(state: AppState): AuditReportView[] {
	const detail = state.jobDetail
	if (!detail?.plan) return []
	const taskIds = new Set(detail.plan.map((t) => t.task_id))
	// the trail is append-only; for retried jobs the latest report per task wins
	const latest = new Map<string, AuditReportView>()
	for (const report of state.auditReports) {
		if (taskIds.has(report.task_id)) latest.set(report.task_id, report)
	}
	return [...latest.values()]
}
