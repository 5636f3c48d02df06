/* Head trimming in tcp_input(), reduced from OpenBSD sys/netinet/tcp_input.c. */
#include <stdint.h>

typedef uint32_t tcp_seq;

struct tcpcb {
    tcp_seq rcv_nxt;
};

struct tcphdr {
    tcp_seq th_seq;
};

int tcp_trim_head(struct tcpcb *tp, struct tcphdr *th)
{
    int todrop;
    todrop = tp->rcv_nxt - th->th_seq;
    return todrop;
}
