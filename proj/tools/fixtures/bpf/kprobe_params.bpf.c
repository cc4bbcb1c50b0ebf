// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 wasm-bpf authors

#include "bpf_defs.h"

/* x86_64 register frame the fixture is compiled against. Field names and
 * order follow the x86_64 kernel pt_regs; the runtime's pt_regs relocation
 * pass rewrites the access offsets for other architectures. */
struct pt_regs {
	__u64 r15, r14, r13, r12, bp, bx, r11, r10;
	__u64 r9, r8, ax, cx, dx, si, di;
	__u64 orig_ax, ip, cs, flags, sp, ss;
} __attribute__((preserve_access_index));

struct param_event {
	__u64 params[5];
};

struct {
	__uint(type, BPF_MAP_TYPE_RINGBUF);
	__uint(max_entries, 4096);
} events SEC(".maps");

SEC("kprobe/fixture_target_fn")
int trace_params(struct pt_regs *ctx)
{
	struct param_event *e;

	e = bpf_ringbuf_reserve(&events, sizeof(*e), 0);
	if (!e)
		return 0;
	e->params[0] = ctx->di;
	e->params[1] = ctx->si;
	e->params[2] = ctx->dx;
	e->params[3] = ctx->cx;
	e->params[4] = ctx->r8;
	bpf_ringbuf_submit(e, 0);
	return 0;
}

char LICENSE[] SEC("license") = "Dual BSD/GPL";
