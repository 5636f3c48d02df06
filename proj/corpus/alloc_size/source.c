/* Record table allocation with a fixed element size. */
#include <stdint.h>
#include <stdlib.h>

uint8_t *alloc_records(uint32_t n) {
    const uint32_t element_size = 16;
    uint8_t *buf = malloc((uint32_t)n * element_size);
    return buf;
}

/* Same allocation behind an input bound that rules out the wrap. */
uint8_t *alloc_records_bounded(uint32_t n) {
    const uint32_t element_size = 16;
    if (n > 0x0FFFFFFF) {
        return 0;
    }
    uint8_t *buf = malloc((uint32_t)n * element_size);
    return buf;
}
