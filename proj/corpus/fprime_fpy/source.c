/* Fpy sequencer equality directive, reduced from
   Svc/FpySequencer/FpySequencerDirectives.cpp. Member functions become
   calls through the receiver; the runtime stack is passed by pointer. */
#include <Fw/Types/BasicTypes.hpp>

struct FpyStack {
    U32 size;
    U8 bytes[1024];
};

struct FpyDirective {
    U32 size;
};

U32 get_size(void);

int equality_directive(struct FpyStack *stack, struct FpyDirective directive)
{
    if (stack->size < directive.get_size() * 2) {
        return 1;
    }
    U64 lhsOffset = stack->size - directive.get_size() * 2;
    U64 rhsOffset = stack->size - directive.get_size();
    stack->size -= directive.get_size() * 2;
    return stack->bytes[lhsOffset] == stack->bytes[rhsOffset];
}
