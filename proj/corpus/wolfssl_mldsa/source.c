/* ML-DSA w1 packing, reduced from wolfcrypt/src/dilithium.c. */
#include <wolfssl/wolfcrypt/types.h>

/* ML-DSA-44: each coefficient is 6 bits wide. */
void dilithium_encode_w1_88_c(const sword32 w1[], word32 w1e32[], unsigned int j)
{
    /* @range w1 0 43 */
    w1e32[0] = (word32)(
        w1[j+0] | (w1[j+1] <<  6) | (w1[j+2] << 12) |
        (w1[j+3] << 18) | (w1[j+4] << 24) |
        (w1[j+5] << 30));
}

/* ML-DSA-65/87: 4-bit coefficients, eight per word. */
void dilithium_encode_w1_32_c(const sword32 w1[], word32 w1e32[], unsigned int j)
{
    /* @range w1 0 15 */
    w1e32[0] = (word32)(
        w1[j+0] | (w1[j+1] <<  4) | (w1[j+2] <<  8) |
        (w1[j+3] << 12) | (w1[j+4] << 16) | (w1[j+5] << 20) |
        (w1[j+6] << 24) | (w1[j+7] << 28));
}
