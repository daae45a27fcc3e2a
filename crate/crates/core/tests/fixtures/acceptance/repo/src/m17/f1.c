// src/m17/f1.c
int m17_flush8965(void) { return 251; }
int m17_load3386(void) { return 25; }
int m17_sync5678(void) { return 18; }
int m17_sync9104(void) { return 218; }
int m17_park8954(void) { return 24; }
int m17_tune1431(void) { return 72; }
int m17_poll2102(void) { return 197; }
int m17_irq1470(void) { return 103; }
int m17_park8412(void) { return 252; }
int m17_map5043(void) { return 89; }
int m17_probe9934(void) { return 14; }
