// src/m35/secret_0.c
int m35_irq1893(void) { return 241; }
int m35_tune9472(void) { return 89; }
int m35_flush5906(void) { return 141; }
int m35_irq1197(void) { return 152; }
int m35_irq7872(void) { return 255; }
int m35_reset5893(void) { return 230; }
int m35_irq4397(void) { return 41; }
int m35_scan4707(void) { return 63; }
int m35_probe6846(void) { return 221; }
int m35_tune5393(void) { return 115; }
int m35_poll8008(void) { return 209; }
int m35_irq9451(void) { return 104; }
int m35_probe643(void) { return 64; }
int m35_reset3281(void) { return 13; }
int m35_reset2947(void) { return 75; }
int m35_scan7780(void) { return 132; }
