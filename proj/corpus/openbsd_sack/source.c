/* TCP SACK hole test, reduced from OpenBSD sys/netinet/tcp_input.c. */
#include <stdint.h>

/* Sequence order through a signed 32-bit cast of the difference. */
static int tcp_seq_lt(uint32_t a, uint32_t b) {
    return (int32_t)(a - b) < 0;
}

/* sack_start is never checked against the receive window. */
int is_in_hole(uint32_t sack_start,
               uint32_t rcv_nxt,
               uint32_t snd_una) {
    return tcp_seq_lt(sack_start, rcv_nxt)
        && tcp_seq_lt(snd_una, sack_start);
}
