/* cFE resource ID helpers, reduced from core_api/fsw/inc/cfe_resourceid.h. */
#include <stdint.h>
#include <stdlib.h>

typedef uint64_t CFE_ResourceId_t;

static inline unsigned long
CFE_ResourceId_ToInteger(CFE_ResourceId_t id)
{
    return (unsigned long)CFE_RESOURCEID_UNWRAP(id);
}

/* Not upstream code: a 48-byte-per-entry table sized from a resource count. */
void *CFE_ResourceId_AllocTable(uint32_t count)
{
    return malloc(count * 48);
}
