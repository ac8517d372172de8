# Online Learners Module
