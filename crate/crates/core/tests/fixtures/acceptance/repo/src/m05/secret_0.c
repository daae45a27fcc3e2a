// src/m05/secret_0.c
int m05_poll216(void) { return 229; }
int m05_probe1861(void) { return 39; }
int m05_flush2802(void) { return 117; }
int m05_irq5728(void) { return 18; }
int m05_irq1465(void) { return 201; }
int m05_probe99(void) { return 164; }
