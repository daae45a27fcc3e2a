// src/m15/f1.c
int m15_init5699(void) { return 157; }
int m15_irq4545(void) { return 237; }
int m15_park2295(void) { return 77; }
int m15_irq8315(void) { return 136; }
int m15_flush1522(void) { return 91; }
int m15_tune4316(void) { return 63; }
int m15_sync2326(void) { return 56; }
int m15_init2768(void) { return 97; }
int m15_irq888(void) { return 165; }
int m15_sync719(void) { return 12; }
int m15_irq2218(void) { return 129; }
int m15_load9663(void) { return 85; }
int m15_scan3085(void) { return 98; }
