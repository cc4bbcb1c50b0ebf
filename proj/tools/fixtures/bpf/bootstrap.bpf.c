// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 wasm-bpf authors

#include "bpf_defs.h"

/* Synthetic tracepoint context injected by the host for
 * tracepoint/sched/sched_process_exec events. Field layout is relocated
 * via CO-RE against the target BTF at load time. */
struct trace_exec_ctx {
	int pid;
	char comm[16];
} __attribute__((preserve_access_index));

struct exec_event {
	int pid;
	__u64 ts_ns;
	char comm[16];
};

struct {
	__uint(type, BPF_MAP_TYPE_RINGBUF);
	__uint(max_entries, 4096);
} rb SEC(".maps");

SEC("tracepoint/sched/sched_process_exec")
int handle_exec(struct trace_exec_ctx *ctx)
{
	struct exec_event *e;

	e = bpf_ringbuf_reserve(&rb, sizeof(*e), 0);
	if (!e)
		return 0;
	e->pid = ctx->pid;
	e->ts_ns = bpf_ktime_get_ns();
	for (int i = 0; i < 16; i++)
		e->comm[i] = ctx->comm[i];
	bpf_ringbuf_submit(e, 0);
	return 0;
}

char LICENSE[] SEC("license") = "Dual BSD/GPL";
