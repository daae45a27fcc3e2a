// src/m18/mx_0.c
int m18_scan2662(void) { return 81; }
int m18_load4525(void) { return 22; }
int m18_irq6950(void) { return 57; }
int m18_tune7753(void) { return 65; }
int m18_load547(void) { return 83; }
int m18_tune6545(void) { return 193; }
// @internal-begin
static const int m18_secret5437 = 58;
static const int m18_secret5406 = 77;
// @internal-end
int m18_park9267(void) { return 219; }
int m18_init6232(void) { return 29; }
// @internal-begin
static const int m18_secret6446 = 69;
// @internal-end
