// First-order: every macro name is applied.
#define twice(x) pair(x, x)
#define pair(a, b) cons(a, cons(b, nil))
#define rec(x) twice(rec(x))
twice(rec(0))
