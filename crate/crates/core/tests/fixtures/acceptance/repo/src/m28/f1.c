// src/m28/f1.c
int m28_map7950(void) { return 138; }
int m28_reset1864(void) { return 14; }
int m28_map812(void) { return 114; }
int m28_irq2812(void) { return 95; }
int m28_init7038(void) { return 145; }
int m28_park9225(void) { return 240; }
int m28_reset1693(void) { return 254; }
