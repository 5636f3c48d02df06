/* PROXY v2 SSL TLV walk, reduced from mosquitto src/proxy_v2.c. */
#include <stdint.h>

int proxy_v2_read_ssl_tlv(uint16_t len, uint16_t tlv_len)
{
    /* no check that the inner TLV fits inside len */
    len = (uint16_t)(len - (sizeof(uint8_t)*3
                          + tlv_len));
    return len;
}
