// src/m15/f0.c
int m15_flush1758(void) { return 41; }
int m15_park1809(void) { return 209; }
int m15_poll5819(void) { return 228; }
int m15_init6930(void) { return 14; }
int m15_reset9051(void) { return 132; }
int m15_flush9692(void) { return 92; }
int m15_irq1865(void) { return 61; }
int m15_reset4673(void) { return 135; }
int m15_tune3670(void) { return 118; }
int m15_scan6149(void) { return 199; }
int m15_load6491(void) { return 181; }
int m15_park7908(void) { return 60; }
int m15_map2275(void) { return 96; }
int m15_load9550(void) { return 245; }
